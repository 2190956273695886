from __future__ import annotations

import csv

from hasneto import plotting
from hasneto.compat import MeasurementFilter, compat_report, find_measurements
from hasneto.validation import dc2_1_violations, validate
from scenarios import calibration_store

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def read_tsv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh, delimiter="\t"))


def test_validation_figure(tmp_path):
    store = calibration_store()[0]
    report = validate(store)
    png, tsv = plotting.write_validation(report, str(tmp_path))
    assert open(png, "rb").read(8) == PNG_MAGIC
    rows = read_tsv(tsv)
    assert len(rows) == 1 + len(report.violations)
    assert {r[0] for r in rows[1:]} == {"DC2-1"}


def test_measurement_series_with_flags(tmp_path):
    store = calibration_store()[0]
    ms = find_measurements(store, MeasurementFilter())
    flagged = dc2_1_violations(validate(store))
    png, tsv = plotting.write_measurements(ms, str(tmp_path), flagged=flagged)
    assert open(png, "rb").read(8) == PNG_MAGIC
    rows = read_tsv(tsv)
    assert rows[0][0] == "iri" and len(rows) == 21


def test_compat_heatmap(tmp_path):
    store, a, b, _ = calibration_store()
    summary = compat_report(store, a[:3], b[:4])
    png, tsv = plotting.write_compat_matrix(summary, a[:3], b[:4], str(tmp_path / "nested"))
    assert open(png, "rb").read(8) == PNG_MAGIC
    rows = read_tsv(tsv)
    assert len(rows) == 13 and rows[1][2] == summary.matrix[0][0]


def test_empty_inputs_still_render(tmp_path):
    store = calibration_store()[0]
    plotting.write_measurements([], str(tmp_path))
    summary = compat_report(store, [], [])
    png, _ = plotting.write_compat_matrix(summary, [], [], str(tmp_path))
    assert open(png, "rb").read(8) == PNG_MAGIC
