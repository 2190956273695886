"""Report figures and their tab-delimited companions.

Every ``write_*`` function renders one PNG and a ``.tsv`` with the plotted
data next to it, and returns both paths.
"""

from __future__ import annotations

import csv
import os
from collections import Counter, defaultdict
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import BoundaryNorm, ListedColormap  # noqa: E402

from .compat import LEVELS, CompatSummary  # noqa: E402
from .model import Measurement, format_decimal, format_timestamp  # noqa: E402
from .validation import RULES, ValidationReport  # noqa: E402

_STYLE = {
    "figure.figsize": (7.0, 4.0),
    "figure.dpi": 110,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.frameon": False,
}
_SEVERITY_COLORS = {"error": "#c0392b", "warning": "#e67e22"}
_LEVEL_COLORS = ["#7f0000", "#d7301f", "#fc8d59", "#fdcc8a", "#1a9850"]


def _short(iri: str) -> str:
    for sep in ("#", "/"):
        if sep in iri.rstrip(sep):
            return iri.rstrip(sep).rsplit(sep, 1)[1]
    return iri


def _write_tsv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _paths(directory: str, stem: str) -> tuple[str, str]:
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, stem + ".png"), os.path.join(directory, stem + ".tsv")


def write_validation(report: ValidationReport, directory: str,
                     stem: str = "validation") -> tuple[str, str]:
    png, tsv = _paths(directory, stem)
    _write_tsv(tsv, ["ruleId", "severity", "subject", "message"],
               ((v.rule_id, v.severity, v.subject, v.message) for v in report.violations))
    counts = Counter(v.rule_id for v in report.violations)
    rules = list(RULES)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        colors = [_SEVERITY_COLORS[RULES[r][0]] for r in rules]
        ax.bar(rules, [counts.get(r, 0) for r in rules], color=colors)
        ax.set_ylabel("violations")
        ax.set_title(f"{report.errors} errors, {report.warnings} warnings")
        for sev, color in _SEVERITY_COLORS.items():
            ax.bar([], [], color=color, label=sev)
        ax.legend(loc="upper right")
        ax.tick_params(axis="x", rotation=45)
        fig.tight_layout()
        fig.savefig(png)
        plt.close(fig)
    return png, tsv


def write_measurements(measurements: Sequence[Measurement], directory: str,
                       stem: str = "measurements",
                       flagged: Optional[set[str]] = None) -> tuple[str, str]:
    """Time series per (characteristic, unit); ``flagged`` IRIs drawn as crosses."""
    png, tsv = _paths(directory, stem)
    flagged = flagged or set()
    _write_tsv(tsv, ["iri", "timestamp", "value", "unit", "characteristic", "dataCollection"],
               ((m.iri, format_timestamp(m.timestamp), format_decimal(m.value), m.unit,
                 m.characteristic, m.data_collection) for m in measurements))
    series: dict[tuple[str, str], list[Measurement]] = defaultdict(list)
    for m in measurements:
        series[(m.characteristic, m.unit)].append(m)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for (ch, unit), ms in sorted(series.items()):
            xs = [m.timestamp for m in ms]
            ys = [float(m.value) for m in ms]
            ax.plot(xs, ys, marker="o", markersize=3, linewidth=0.8,
                    label=f"{_short(ch)} [{_short(unit)}]")
            bad = [(m.timestamp, float(m.value)) for m in ms if m.iri in flagged]
            if bad:
                ax.scatter(*zip(*bad), marker="x", s=40, color="#c0392b", zorder=3)
        ax.set_xlabel("time (UTC)")
        ax.set_ylabel("value")
        if series:
            ax.legend(loc="best")
        fig.autofmt_xdate()
        fig.tight_layout()
        fig.savefig(png)
        plt.close(fig)
    return png, tsv


def write_compat_matrix(summary: CompatSummary, set_a: Sequence[str], set_b: Sequence[str],
                        directory: str, stem: str = "compat") -> tuple[str, str]:
    png, tsv = _paths(directory, stem)
    _write_tsv(tsv, ["a", "b", "level"],
               ((a, b, summary.matrix[i][j]) for i, a in enumerate(set_a)
                for j, b in enumerate(set_b)))
    grid = [[LEVELS.index(lvl) for lvl in row] for row in summary.matrix]
    cmap = ListedColormap(_LEVEL_COLORS)
    norm = BoundaryNorm([i - 0.5 for i in range(len(LEVELS) + 1)], cmap.N)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(1.8 + 0.45 * max(len(set_b), 1),
                                        1.6 + 0.35 * max(len(set_a), 1)))
        ax.grid(False)
        if grid:
            img = ax.imshow(grid, cmap=cmap, norm=norm, aspect="auto")
            cbar = fig.colorbar(img, ax=ax, ticks=range(len(LEVELS)))
            cbar.ax.set_yticklabels(LEVELS)
        ax.set_xticks(range(len(set_b)))
        ax.set_xticklabels([_short(b) for b in set_b], rotation=60, ha="right")
        ax.set_yticks(range(len(set_a)))
        ax.set_yticklabels([_short(a) for a in set_a])
        ax.set_title(f"minimum level: {summary.min_level}")
        fig.tight_layout()
        fig.savefig(png)
        plt.close(fig)
    return png, tsv
