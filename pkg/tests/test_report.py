import csv
from fractions import Fraction as F

import numpy as np

from psatz.exactlinalg import RatMatrix
from psatz.reduction import pencil_from_matrices
from psatz.report import format_outcome, format_point, format_probe, write_report_dir
from psatz.sdpnum import ProbeReport, SolveOutcome, SolveStatus, degeneracy_probe, solve_feasibility

import cases


def test_format_point():
    assert format_point([F(1, 2), -3]) == "a1=1/2, a2=-3"
    assert format_point([]) == "()"


def test_outcome_lines():
    text = format_outcome(solve_feasibility(cases.pencil("rank_one")))
    keys = [line.split(":")[0] for line in text.splitlines()]
    assert keys == [
        "status", "message", "iterations", "alpha", "mu_trace", "reduced_margin", "min_eig_estimate",
        "common_kernel_dim",
    ]
    assert text.startswith("status: Stalled")


def test_long_rationals_are_abbreviated():
    big = F(3**80, 7**60)
    text = format_probe(ProbeReport(big, (F(1),), False), [F(1)])
    assert "exact value has" in text


def test_probe_notes():
    assert "singular point" in format_probe(degeneracy_probe(cases.pencil("rank_one"), [5, -7]), [5, -7])
    text = format_probe(degeneracy_probe(cases.pencil("two_var_basis"), [2, 8, 79]), [2, 8, 79])
    assert "share a kernel of dimension 1" in text


def test_report_dir_contents(tmp_path):
    pen = cases.pencil("rank_one")
    out = solve_feasibility(pen)
    paths = write_report_dir(tmp_path, out, pen)
    assert [p.name for p in paths] == ["trace.csv", "mu_trace.png", "spectrum.csv", "spectrum.png"]
    rows = list(csv.reader(open(tmp_path / "trace.csv")))
    assert rows[0] == ["iteration", "mu"] and len(rows) == len(out.mu_trace) + 1
    assert [float(r[1]) for r in rows[1:]] == out.mu_trace
    rows = list(csv.reader(open(tmp_path / "spectrum.csv")))
    assert len(rows) == pen.size + 1
    assert (tmp_path / "mu_trace.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_report_without_parameters(tmp_path):
    pen = pencil_from_matrices(-RatMatrix.identity(2), [])
    out = SolveOutcome(SolveStatus.FEASIBLE, np.zeros(0))
    names = [p.name for p in write_report_dir(tmp_path / "sub", out, pen)]
    assert "mu_trace.png" in names and "spectrum.csv" in names
