from __future__ import annotations

import json
import math

import numpy as np

from qbounds import report, suite


def test_normalize_handles_numpy_complex_and_infinities():
    out = report.normalize({"a": np.float64(1 / 3), "b": 1 + 2j, "c": math.inf, "d": (np.int64(2), np.bool_(True))})
    assert out == {"a": 0.333333333333, "b": {"re": 1.0, "im": 2.0}, "c": "inf", "d": [2, True]}


def test_dumps_is_sorted_and_stable():
    a = report.dumps({"z": 1, "a": [0.1, 0.2]})
    assert a == report.dumps({"a": [0.1, 0.2], "z": 1})
    assert json.loads(a) == {"a": [0.1, 0.2], "z": 1}


def test_rows_to_csv_flattens_rows():
    text = report.rows_to_csv([{"n": 1, "p": 0.5}, {"n": 2, "p": 0.25}])
    lines = text.strip().splitlines()
    assert lines[0].split(",")[:2] == ["n", "p"]
    assert len(lines) == 3


def test_write_atomic(tmp_path):
    p = tmp_path / "out.json"
    report.write_atomic(p, "first")
    report.write_atomic(p, "second")
    assert p.read_text() == "second"
    assert [q.name for q in tmp_path.iterdir()] == ["out.json"]


def test_suite_passes_and_runs_fast():
    outcome = suite.run_suite()
    assert outcome.passed, [r.to_dict() for r in outcome.failures]
    assert len(outcome.results) >= 60
    assert outcome.elapsed < 120


def test_suite_notes_record_published_values():
    results = suite.run_suite(["cat", "su2"]).results
    notes = {r.name: r.note for r in results}
    assert "0.64" in notes["p2_violation_threshold"]
    assert "167" in notes["phase_averaged_violation_pct"]


def test_each_perturbation_is_caught():
    from qbounds.bounds import BOUND_NAMES

    for name in BOUND_NAMES:
        assert not suite.run_suite(perturb={name: 1.01}).passed, name


def test_format_table_lists_every_check():
    outcome = suite.run_suite(["fig1"])
    table = suite.format_table(outcome)
    for r in outcome.results:
        assert r.name in table
