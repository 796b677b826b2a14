import csv
import io
import json
import logging
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailscope.distributions import Gaussian, Laplace, Pareto, PutTailDown, ReciprocalPareto, SymmetricStable
from tailscope.errors import SpecValidationError
from tailscope.harness import (
    CSV_COLUMNS,
    KINDS,
    ExperimentSpec,
    ReportRow,
    characterization_check,
    monotone_decreasing_with_bands,
    rows_to_csv,
    run_experiment,
)


def test_max_ratio_pareto_rows():
    spec = ExperimentSpec("max-ratio", Pareto(1.0, 1.0), (2, 10, 100), 0.5, 4000, 1)
    rows = run_experiment(spec)
    assert [r.n for r in rows] == [2, 10, 100]
    for r in rows:
        assert r.oracle == pytest.approx(0.5, abs=1e-9)
        assert r.limit == 0.5
        assert r.abs_gap == abs(r.mc_estimate - r.oracle)
        assert r.within_band()


def test_first_kind_convergence_stable():
    spec = ExperimentSpec("first-kind-convergence", SymmetricStable(0.7), (100, 1000, 10_000), 3.0, 10_000, 42)
    rows = run_experiment(spec)
    assert monotone_decreasing_with_bands(rows)
    assert all(a.mc_estimate > b.mc_estimate for a, b in zip(rows, rows[1:]))
    assert all(r.oracle is None and r.limit == 0.0 for r in rows)


def test_first_kind_gaussian_references():
    spec = ExperimentSpec("first-kind-convergence", Gaussian(), (50,), 2.0, 20_000, 5)
    (row,) = run_experiment(spec)
    assert row.limit == pytest.approx(0.0455002638963584, rel=1e-12)
    assert row.oracle is not None and row.within_band()


def test_oracle_unavailable_warns(caplog):
    spec = ExperimentSpec("max-ratio", SymmetricStable(0.7), (10,), 0.5, 200, 0)
    with caplog.at_level(logging.WARNING):
        (row,) = run_experiment(spec)
    assert row.oracle is None and row.abs_gap is None
    assert row.within_band() is None
    assert row.warnings and "oracle unavailable" in caplog.text


def test_min_ratio_and_characterization_rows():
    (row,) = run_experiment(ExperimentSpec("min-ratio", Gaussian(), (20,), 2.0, 5000, 0))
    assert row.limit == 0.5
    assert row.within_band()
    rows = run_experiment(ExperimentSpec("characterization", ReciprocalPareto(2.0), (2, 20), 2.0, 5000, 0))
    for r in rows:
        assert r.oracle == pytest.approx(0.75, abs=1e-9)
        assert r.limit == 0.75
        assert r.within_band()
    (row,) = run_experiment(ExperimentSpec("characterization", Pareto(2.0), (5,), 0.5, 5000, 0))
    assert row.oracle == pytest.approx(0.25, abs=1e-9)


def test_stability_index_row():
    (row,) = run_experiment(ExperimentSpec("stability-index", Pareto(1.5), (200,), 0.5, 20_000, 3))
    assert row.oracle == pytest.approx(1.5, abs=1e-7)
    assert row.limit == 1.5
    assert row.within_band()


def test_stability_index_boundary_is_reported():
    # the gaussian max ratio at n = 10^4 is of order 1e-9: no events in 50 replicates
    (row,) = run_experiment(ExperimentSpec("stability-index", Gaussian(), (10_000,), 0.5, 50, 0))
    assert row.mc_estimate is None and row.warnings


def test_put_tail_down_row():
    model = PutTailDown(Gaussian(), 0.5)
    (row,) = run_experiment(ExperimentSpec("put-tail-down", model, (1000,), 3.0, 2000, 0))
    assert row.limit == pytest.approx(0.01690, abs=1e-4)
    with pytest.raises(SpecValidationError):
        ExperimentSpec("put-tail-down", Gaussian(), (10,), 3.0, 10, 0)


def test_multivariate_row():
    spec = ExperimentSpec("multivariate", Gaussian(), (5, 10), 1.0, 100, 0, model2=Laplace(1.0), mode="order-kappa")
    rows = run_experiment(spec)
    assert all(r.mc_estimate == 1.0 for r in rows)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(replicates=0),
        dict(replicates=2.5),
        dict(kind="nonsense"),
        dict(n_grid=()),
        dict(n_grid=(10, 5)),
        dict(n_grid=(10, 10)),
        dict(n_grid=(1, 5)),
        dict(param=1.5),
        dict(param=math.nan),
        dict(master_seed=1.5),
        dict(model="gaussian"),
    ],
)
def test_spec_validation(kwargs):
    base = dict(kind="max-ratio", model=Gaussian(), n_grid=(10, 20), param=0.5, replicates=10, master_seed=0)
    base.update(kwargs)
    with pytest.raises(SpecValidationError):
        ExperimentSpec(**base)


def test_spec_param_domains():
    with pytest.raises(SpecValidationError):
        ExperimentSpec("min-ratio", Gaussian(), (10,), 0.5, 10, 0)
    with pytest.raises(SpecValidationError):
        ExperimentSpec("first-kind-convergence", Gaussian(), (10,), -1.0, 10, 0)
    with pytest.raises(SpecValidationError):
        ExperimentSpec("characterization", ReciprocalPareto(1.0), (10,), 0.5, 10, 0)
    with pytest.raises(SpecValidationError):
        ExperimentSpec("multivariate", Gaussian(), (2,), 1.0, 10, 0)
    with pytest.raises(SpecValidationError):
        ExperimentSpec("multivariate", Gaussian(), (5,), 1.0, 10, 0, mode="other")


def test_spec_from_json_errors():
    with pytest.raises(SpecValidationError):
        ExperimentSpec.from_json("{not json")
    with pytest.raises(SpecValidationError):
        ExperimentSpec.from_json("[1, 2]")
    with pytest.raises(SpecValidationError):
        ExperimentSpec.from_json(json.dumps({"kind": "max-ratio"}))
    good = ExperimentSpec("max-ratio", Gaussian(), (10,), 0.5, 10, 0).to_dict()
    good["model"] = {"family": "weibull"}
    with pytest.raises(SpecValidationError):
        ExperimentSpec.from_dict(good)


_models = st.sampled_from([Gaussian(), Pareto(1.5, 2.0), Laplace(0.5), SymmetricStable(0.7), PutTailDown(Laplace(1.0), 0.25)])


@settings(max_examples=60)
@given(
    model=_models,
    grid=st.lists(st.integers(3, 10**6), min_size=1, max_size=6, unique=True).map(sorted),
    kappa=st.floats(0.01, 0.99),
    reps=st.integers(1, 10**6),
    seed=st.integers(-(2**63), 2**63),
)
def test_spec_json_round_trip(model, grid, kappa, reps, seed):
    spec = ExperimentSpec("max-ratio", model, tuple(grid), kappa, reps, seed)
    assert ExperimentSpec.from_json(spec.to_json()) == spec
    mv = ExperimentSpec("multivariate", model, tuple(grid), kappa, reps, seed, model2=Gaussian(), mode="order-kappa")
    assert ExperimentSpec.from_json(mv.to_json()) == mv


def test_csv_schema_and_determinism():
    spec = ExperimentSpec("max-ratio", Laplace(1.0), (5, 50), 0.5, 3000, 9)
    text = rows_to_csv(run_experiment(spec, threads=1))
    assert text == rows_to_csv(run_experiment(spec, threads=3))
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3
    parsed = dict(zip(rows[0], rows[1]))
    assert parsed["kind"] == "max-ratio" and parsed["n"] == "5" and parsed["seed"] == "9"
    assert float(parsed["mc_estimate"]) == run_experiment(spec)[0].mc_estimate


def test_csv_empty_cells():
    row = ReportRow("max-ratio", "m", 3, 0.5, 10, 0, 0.1, 0.01)
    line = rows_to_csv([row]).splitlines()[1]
    assert line.endswith(",,,,0")


def test_monotone_bands():
    spec = ExperimentSpec("max-ratio", Gaussian(), (2, 3), 0.5, 10, 0)
    a = ReportRow.build(spec, 2, 0.5, 0.01)
    b = ReportRow.build(spec, 3, 0.4, 0.01)
    c = ReportRow.build(spec, 4, 0.39, 0.01)
    assert monotone_decreasing_with_bands([a, b], strict=True)
    assert not monotone_decreasing_with_bands([a, b, c], strict=True)
    # a noisy flat step is tolerated as long as the ends separate
    assert monotone_decreasing_with_bands([a, b, c])
    assert not monotone_decreasing_with_bands([b, c])
    rising = ReportRow.build(spec, 4, 0.6, 0.01)
    assert not monotone_decreasing_with_bands([a, b, rising])
    assert monotone_decreasing_with_bands([a])
    assert not monotone_decreasing_with_bands([a, ReportRow.build(spec, 3, None, None)])


def test_characterization_check_examples():
    good = characterization_check(Pareto(2.0, 1.0), [0.2, 0.5, 0.8], [2, 5, 20], 1e-7)
    assert good.passed and len(good.cells) == 9 and good.event == "max-ratio"
    bad = characterization_check(Gaussian(), [0.2, 0.5, 0.8], [2, 5, 20], 1e-7, alpha=2.0)
    assert not bad.passed and bad.max_deviation > 1e-3
    assert characterization_check(Gaussian(), [0.5], [5], math.inf, alpha=2.0).passed
    rec = characterization_check(ReciprocalPareto(0.5), [1.5, 2.0, 4.0], [2, 5, 20], 1e-7)
    assert rec.passed and rec.event == "min-ratio"
    lines = rec.to_csv().splitlines()
    assert lines[0].startswith("event,alpha,n") and len(lines) == 10


def test_characterization_light_tail_default():
    # light tails have index inf, so the target is 0 and the check fails
    report = characterization_check(Laplace(1.0), [0.5], [5], 1e-7)
    assert report.alpha == math.inf and not report.passed
    assert report.cells[0].target == 0.0


def test_kinds_listed():
    assert set(KINDS) == {
        "first-kind-convergence", "min-ratio", "max-ratio", "characterization",
        "stability-index", "put-tail-down", "multivariate",
    }


def test_multivariate_model_label():
    spec = ExperimentSpec("multivariate", Gaussian(), (5,), 2.0, 50, 0, model2=Laplace(1.0))
    (row,) = run_experiment(spec)
    assert row.model == "gaussian:mean=0.0,sigma=1.0 / laplace:b=1.0"
