from dataclasses import replace
from fractions import Fraction

import pytest

from hvclab.caps import Caps
from hvclab.errors import DomainError, SizeError
from hvclab.jsonio import dumps
from hvclab.pipeline import PipelineConfig, render_text, run_pipeline


@pytest.fixture(scope="module")
def report():
    return run_pipeline(PipelineConfig())


def test_yes_branch_has_completeness_witness(report):
    wit = report["yes"]["witness"]
    assert wit["weight"] == {"num": 9, "den": 19}
    assert wit["independent"]
    assert wit["decode"]["status"] == "ok"
    assert wit["decode"]["expected_fraction"] == {"num": 1, "den": 1}


def test_exact_cover_not_above_complement_of_witness(report):
    exact = report["yes"]["solvers"]["exact"]
    assert exact["status"] == "optimal"
    assert Fraction(exact["min_cover_weight"]["num"], exact["min_cover_weight"]["den"]) <= Fraction(10, 19)


def test_gap_parameters(report):
    par = report["parameters"]
    assert par["gap_identity_holds"]
    assert par["gap_formula"] == {"num": 171, "den": 100}


def test_text_report_tags_every_line(report):
    text = render_text(report)
    assert all(line.startswith("[desk scale]") for line in text.splitlines())


def test_deterministic(report):
    assert dumps(run_pipeline(PipelineConfig())) == dumps(report)


def test_seed_changes_report(report):
    assert dumps(run_pipeline(PipelineConfig(seed=8))) != dumps(report)


def test_solvers_skipped_over_edge_cap():
    rep = run_pipeline(PipelineConfig(caps=Caps(max_edges=100)))
    assert "skipped" in rep["yes"]["solvers"]


def test_budget_exhaustion_reported_not_raised():
    rep = run_pipeline(PipelineConfig(caps=Caps(solver_max_nodes=3)))
    assert rep["yes"]["solvers"]["exact"]["status"] == "budget exhausted"


@pytest.mark.parametrize("change", [dict(epsilon=Fraction(1)), dict(k=2), dict(l=1), dict(mode="lazy"),
                                    dict(rz=3), dict(y_count=3, z_count=2)])
def test_config_validation(change):
    with pytest.raises(DomainError):
        run_pipeline(replace(PipelineConfig(), **change))


def test_config_size_caps():
    with pytest.raises(SizeError, match="range"):
        run_pipeline(PipelineConfig(l=3, caps=Caps(max_range=4)))
