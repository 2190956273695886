"""Collects one PASS/FAIL line per acceptance criterion."""

from __future__ import annotations

import time
from contextlib import contextmanager

RESULTS: list[str] = []


@contextmanager
def criterion(number: int, title: str, budget: float | None = None):
    """Time the block; record PASS, or FAIL with the reason, then re-raise."""
    start = time.perf_counter()
    notes: list[str] = []
    try:
        yield notes
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"FAIL  [{number}] {title} ({elapsed:.2f} s): {type(exc).__name__}: {exc}"
        RESULTS.append(line)
        print(line)
        raise
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed >= budget:
        line = f"FAIL  [{number}] {title}: {elapsed:.2f} s exceeds {budget:g} s"
        RESULTS.append(line)
        print(line)
        raise AssertionError(line)
    extra = f"; {'; '.join(notes)}" if notes else ""
    line = f"PASS  [{number}] {title} ({elapsed:.2f} s{'' if budget is None else f' < {budget:g} s'}{extra})"
    RESULTS.append(line)
    print(line)
