"""Declarative experiments and their CSV reports.

An :class:`ExperimentSpec` names an experiment kind, a model, a grid of sample
sizes and one parameter (``k``, ``kappa`` or ``rho`` depending on the kind).
:func:`run_experiment` turns it into one :class:`ReportRow` per grid point.

Column meaning per kind
-----------------------
first-kind-convergence
    ``P{|X_1 - xbar_n| > k s_n}``; oracle is the exact finite-n Gaussian value
    (Gaussian models only); limit is ``2(1 - Phi(k))`` for Gaussian, 0 for
    stable laws with ``alpha < 2``.
min-ratio
    ``P{X_(2) >= rho X_(1)}``; limit ``rho**(-alpha)`` with ``alpha`` the index
    of the density of ``|X|`` at zero.
max-ratio
    ``P{X_(n-1) <= kappa X_(n)}``; limit ``kappa**alpha`` with ``alpha`` the
    tail index (0 for light tails).
characterization
    max-ratio for Pareto-type models, ``P{X_(2) <= rho X_(1)}`` for
    reciprocal-Pareto models; the limit column is the characterizing value.
stability-index
    ``alpha_hat = ln p_hat / ln kappa`` with its delta-method standard error;
    oracle is the same transform of the exact probability, limit the tail index.
put-tail-down
    first-kind probability of the put-tail-down model; limit is the closed
    form ``2(1-p) Fbar(k sqrt(1-p) sigma)``.
multivariate
    first-kind (``mode="first-kind"``) or order-kappa hull-area estimate; the
    model column reads ``x-law / y-law`` when a second law is given.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from . import oracles
from .distributions import (
    DistributionModel,
    Gaussian,
    PutTailDown,
    ReciprocalPareto,
    SymmetricReciprocalPareto,
    SymmetricStable,
    model_from_dict,
    ptd_tail_probability,
)
from .errors import BoundaryError, QuadratureError, SpecValidationError, TailscopeError, UnsupportedError
from .estimators import (
    first_kind_prob_mc,
    max_ratio_prob_mc,
    min_ratio_prob_mc,
    stability_index_estimate,
)
from .multivariate import hull_area_outlier_mc

log = logging.getLogger(__name__)

KINDS = (
    "first-kind-convergence",
    "min-ratio",
    "max-ratio",
    "characterization",
    "stability-index",
    "put-tail-down",
    "multivariate",
)

CSV_COLUMNS = (
    "kind",
    "model",
    "n",
    "param",
    "replicates",
    "seed",
    "mc_estimate",
    "mc_stderr",
    "oracle",
    "limit",
    "abs_gap",
    "degenerate_count",
)


def _as_int(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise SpecValidationError(f"{name} must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    model: DistributionModel
    n_grid: tuple[int, ...]
    param: float
    replicates: int
    master_seed: int
    model2: DistributionModel | None = None
    mode: str = "first-kind"

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(self.n_grid))
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecValidationError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.model, DistributionModel):
            raise SpecValidationError("model must be a DistributionModel")
        grid = self.n_grid
        if not grid:
            raise SpecValidationError("n_grid must be nonempty")
        if any(int(n) != n or n < 1 for n in grid):
            raise SpecValidationError(f"n_grid entries must be positive integers, got {grid!r}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise SpecValidationError(f"n_grid must be strictly increasing, got {grid!r}")
        min_n = 3 if self.kind == "multivariate" else 2
        if grid[0] < min_n:
            raise SpecValidationError(f"{self.kind} needs n >= {min_n}")
        reps = self.replicates
        if isinstance(reps, bool) or not isinstance(reps, (int, float)) or int(reps) != reps or reps < 1:
            raise SpecValidationError(f"replicates must be a positive integer, got {self.replicates!r}")
        if isinstance(self.master_seed, bool) or not isinstance(self.master_seed, int):
            raise SpecValidationError("master_seed must be an integer")
        p = self.param
        if not isinstance(p, (int, float)) or not math.isfinite(p):
            raise SpecValidationError(f"param must be a finite number, got {p!r}")
        kind = self.kind
        legal = True
        if kind in ("first-kind-convergence", "put-tail-down"):
            legal = p >= 0
        elif kind == "min-ratio":
            legal = p > 1
        elif kind in ("max-ratio", "stability-index"):
            legal = 0 < p < 1
        elif kind == "characterization":
            legal = p > 1 if _characterized_event(self.model) == "min-ratio" else 0 < p < 1
        elif kind == "multivariate":
            if self.mode not in ("first-kind", "order-kappa"):
                raise SpecValidationError(f"multivariate mode must be first-kind or order-kappa, got {self.mode!r}")
            legal = p >= 0 if self.mode == "first-kind" else 0 < p <= 1
        if not legal:
            raise SpecValidationError(f"param {p!r} is outside the legal domain for {kind}")
        if kind == "put-tail-down" and not isinstance(self.model, PutTailDown):
            raise SpecValidationError("put-tail-down experiments need a put-tail-down model")

    def to_dict(self) -> dict[str, Any]:
        out = {
            "kind": self.kind,
            "model": self.model.to_dict(),
            "n_grid": list(self.n_grid),
            "param": self.param,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
        }
        if self.model2 is not None:
            out["model2"] = self.model2.to_dict()
        if self.kind == "multivariate":
            out["mode"] = self.mode
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentSpec:
        try:
            model2 = data.get("model2")
            return cls(
                kind=data["kind"],
                model=model_from_dict(data["model"]),
                n_grid=tuple(int(n) for n in data["n_grid"]),
                param=float(data["param"]),
                replicates=_as_int(data["replicates"], "replicates"),
                master_seed=_as_int(data["master_seed"], "master_seed"),
                model2=model_from_dict(model2) if model2 is not None else None,
                mode=data.get("mode", "first-kind"),
            )
        except KeyError as exc:
            raise SpecValidationError(f"experiment spec is missing {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, SpecValidationError):
                raise
            raise SpecValidationError(f"malformed experiment spec: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> ExperimentSpec:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecValidationError(f"malformed JSON: {exc}") from None
        if not isinstance(data, dict):
            raise SpecValidationError("experiment spec must be a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class ReportRow:
    kind: str
    model: str
    n: int
    param: float
    replicates: int
    seed: int
    mc_estimate: float | None
    mc_stderr: float | None
    oracle: float | None = None
    limit: float | None = None
    abs_gap: float | None = None
    degenerate_count: int = 0
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def build(cls, spec: ExperimentSpec, n: int, estimate, stderr, oracle=None, limit=None, degenerate=0, warnings=()):
        gap = abs(estimate - oracle) if estimate is not None and oracle is not None else None
        label = spec.model.describe()
        if spec.model2 is not None:
            label += " / " + spec.model2.describe()
        return cls(
            spec.kind, label, n, spec.param, spec.replicates, spec.master_seed,
            estimate, stderr, oracle, limit, gap, degenerate, tuple(warnings),
        )

    def within_band(self, n_se: float = 3.0) -> bool | None:
        if self.abs_gap is None or self.mc_stderr is None:
            return None
        return self.abs_gap <= n_se * self.mc_stderr


# -- per-kind runners ---------------------------------------------------------------


def _characterized_event(model: DistributionModel) -> str:
    if isinstance(model, (ReciprocalPareto, SymmetricReciprocalPareto)):
        return "min-ratio"
    return "max-ratio"


def _safe_oracle(fn, *args):
    try:
        return fn(*args), None
    except UnsupportedError as exc:
        return None, f"oracle unavailable: {exc}"
    except TailscopeError as exc:
        return None, f"oracle failed: {exc}"


def _first_kind_references(model: DistributionModel, n: int, k: float):
    if isinstance(model, Gaussian) or (isinstance(model, SymmetricStable) and model.alpha == 2.0):
        return oracles.gaussian_first_kind_finite_n(n, k), oracles.gaussian_first_kind_reference(k), None
    if isinstance(model, SymmetricStable):
        return None, 0.0, "no finite-n oracle for stable laws"
    return None, None, f"no first-kind oracle for {model.family}"


def _max_limit(model, kappa):
    alpha = model.tail_index()
    return None if alpha is None else oracles.limit_max_ratio(alpha, kappa)


def _min_limit(model, rho):
    alpha = model.zero_index()
    return None if alpha is None else rho ** (-alpha)


def _row(spec: ExperimentSpec, n: int, threads: int | None) -> ReportRow:
    kind, model, param = spec.kind, spec.model, spec.param
    reps, seed = spec.replicates, spec.master_seed
    notes: list[str] = []

    if kind == "first-kind-convergence":
        est = first_kind_prob_mc(model, n, param, reps, seed, threads)
        oracle, limit, note = _first_kind_references(model, n, param)
        if note:
            notes.append(note)
        return ReportRow.build(spec, n, est.estimate, est.std_error, oracle, limit, est.degenerate_count, notes)

    if kind == "put-tail-down":
        est = first_kind_prob_mc(model, n, param, reps, seed, threads)
        limit = ptd_tail_probability(model.base, model.p, param) if param > 0 else 1.0
        return ReportRow.build(spec, n, est.estimate, est.std_error, None, limit, est.degenerate_count)

    if kind == "max-ratio":
        est = max_ratio_prob_mc(model, n, param, reps, seed, threads)
        oracle, note = _safe_oracle(oracles.exact_max_ratio_prob, model, n, param)
        notes += [note] if note else []
        return ReportRow.build(spec, n, est.estimate, est.std_error, oracle, _max_limit(model, param), warnings=notes)

    if kind == "min-ratio":
        est = min_ratio_prob_mc(model, n, param, reps, seed, threads)
        oracle, note = _safe_oracle(oracles.exact_min_ratio_prob, model, n, param)
        notes += [note] if note else []
        return ReportRow.build(spec, n, est.estimate, est.std_error, oracle, _min_limit(model, param), warnings=notes)

    if kind == "characterization":
        if _characterized_event(model) == "min-ratio":
            est = min_ratio_prob_mc(model, n, param, reps, seed, threads)
            value, stderr = 1.0 - est.estimate, est.std_error
            oracle, note = _safe_oracle(oracles.exact_min_ratio_complement, model, n, param)
            limit = oracles.limit_min_ratio(model.alpha, param)
        else:
            est = max_ratio_prob_mc(model, n, param, reps, seed, threads)
            value, stderr = est.estimate, est.std_error
            oracle, note = _safe_oracle(oracles.exact_max_ratio_prob, model, n, param)
            limit = _max_limit(model, param)
        notes += [note] if note else []
        return ReportRow.build(spec, n, value, stderr, oracle, limit, warnings=notes)

    if kind == "stability-index":
        est = max_ratio_prob_mc(model, n, param, reps, seed, threads)
        try:
            alpha_hat = stability_index_estimate(est.estimate, param)
            alpha_se = est.std_error / (est.estimate * abs(math.log(param)))
        except BoundaryError as exc:
            alpha_hat = alpha_se = None
            notes.append(str(exc))
        exact, note = _safe_oracle(oracles.exact_max_ratio_prob, model, n, param)
        notes += [note] if note else []
        oracle = None
        if exact is not None and 0.0 < exact < 1.0:
            oracle = stability_index_estimate(exact, param)
        return ReportRow.build(spec, n, alpha_hat, alpha_se, oracle, model.tail_index(), warnings=notes)

    if kind == "multivariate":
        est = hull_area_outlier_mc(model, spec.model2, n, param, spec.mode, reps, seed)
        return ReportRow.build(spec, n, est.estimate, est.std_error, degenerate=est.degenerate_count)

    raise SpecValidationError(f"unknown experiment kind {kind!r}")


def run_experiment(spec: ExperimentSpec, threads: int | None = None) -> list[ReportRow]:
    """One report row per grid point; deterministic given ``spec``."""
    spec.validate()
    rows = []
    for n in spec.n_grid:
        row = _row(spec, int(n), threads)
        for note in row.warnings:
            log.warning("%s n=%d: %s", spec.kind, n, note)
        rows.append(row)
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        data = asdict(row)
        writer.writerow([_cell(data[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def monotone_decreasing_with_bands(rows: Sequence[ReportRow], n_se: float = 3.0, *, strict: bool = False) -> bool:
    """Check that estimates decrease down the grid, allowing for Monte Carlo noise.

    By default each step may not rise by more than the combined ``n_se``
    bands (lower band of the later row at most the upper band of the earlier
    one) and the last row must sit below the first after noise, i.e. its
    upper band is below the first row's lower band.  ``strict=True`` demands
    that separation between every adjacent pair.
    """
    if any(r.mc_estimate is None or r.mc_stderr is None for r in rows):
        return False

    def separated(a, b):
        return b.mc_estimate + n_se * b.mc_stderr < a.mc_estimate - n_se * a.mc_stderr

    for a, b in zip(rows, rows[1:]):
        if strict and not separated(a, b):
            return False
        if b.mc_estimate - n_se * b.mc_stderr > a.mc_estimate + n_se * a.mc_stderr:
            return False
    return len(rows) < 2 or separated(rows[0], rows[-1])


# -- characterization ---------------------------------------------------------------


@dataclass(frozen=True)
class CharacterizationCell:
    n: int
    param: float
    exact: float
    target: float
    deviation: float


@dataclass(frozen=True)
class CharacterizationReport:
    event: str
    alpha: float
    tol: float
    cells: tuple[CharacterizationCell, ...]

    @property
    def max_deviation(self) -> float:
        return max((c.deviation for c in self.cells), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("event", "alpha", "n", "param", "exact", "target", "deviation"))
        for c in self.cells:
            writer.writerow((self.event, repr(self.alpha), c.n, repr(c.param), repr(c.exact), repr(c.target), repr(c.deviation)))
        return buf.getvalue()


def characterization_check(
    model: DistributionModel,
    param_grid: Sequence[float],
    n_grid: Sequence[int],
    tol: float,
    *,
    alpha: float | None = None,
    event: str | None = None,
) -> CharacterizationReport:
    """Compare exact finite-n probabilities with their Pareto-characterizing values.

    ``event="max-ratio"`` checks ``P{X_(n-1) <= kappa X_(n)} = kappa**alpha``;
    ``event="min-ratio"`` checks ``P{X_(2) <= rho X_(1)} = 1 - rho**(-alpha)``.
    Both default from the model family, and ``alpha`` defaults to the model's
    own parameter (tail index for other families).  Passes iff every cell
    deviates by at most ``tol``.

    Raises
    ------
    QuadratureError
        With ``n`` and ``param`` of the failing cell added to its diagnostics.
    """
    event = event or _characterized_event(model)
    if alpha is None:
        alpha = getattr(model, "alpha", None)
        if alpha is None:
            alpha = model.tail_index() if event == "max-ratio" else model.zero_index()
        if alpha is None:
            raise SpecValidationError(f"no reference alpha for {model.family}; pass alpha explicitly")
    cells = []
    for n in n_grid:
        for param in param_grid:
            try:
                if event == "max-ratio":
                    exact = oracles.exact_max_ratio_prob(model, n, param)
                    target = oracles.limit_max_ratio(alpha, param)
                elif event == "min-ratio":
                    exact = 1.0 - oracles.exact_min_ratio_prob(model, n, param)
                    target = oracles.limit_min_ratio(alpha, param)
                else:
                    raise SpecValidationError(f"event must be max-ratio or min-ratio, got {event!r}")
            except QuadratureError as exc:
                exc.diagnostics.update(n=n, param=param)
                raise
            cells.append(CharacterizationCell(int(n), float(param), exact, target, abs(exact - target)))
    return CharacterizationReport(event, float(alpha), float(tol), tuple(cells))


__all__ = [
    "KINDS",
    "CSV_COLUMNS",
    "ExperimentSpec",
    "ReportRow",
    "run_experiment",
    "rows_to_csv",
    "monotone_decreasing_with_bands",
    "CharacterizationCell",
    "CharacterizationReport",
    "characterization_check",
]
