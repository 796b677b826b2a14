"""Exact finite-n probabilities for the extreme-ratio events, plus their limits.

All integrals are over the law of ``|X|`` (the folded law for symmetric
models).  Integration ranges are split at quantiles of ``|X|`` chosen around the
scale where the ``n``-th power factor switches on, so that the sharply peaked
integrands at large ``n`` are resolved by the adaptive rule instead of being
stepped over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .distributions import DistributionModel
from .errors import ParameterDomainError, QuadratureError, UnsupportedError

__all__ = [
    "QuadratureResult",
    "quadrature",
    "exact_min_ratio_prob",
    "exact_min_ratio_complement",
    "exact_max_ratio_prob",
    "limit_min_ratio",
    "limit_max_ratio",
    "gaussian_first_kind_reference",
    "gaussian_first_kind_finite_n",
    "joint_extreme_pair_density",
]

DEFAULT_ABS_TOL = 1e-9
_SUBDIVISION_LIMIT = 400


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    subdivisions: int

    def __float__(self) -> float:
        return self.value


def quadrature(
    integrand: Callable[[float], float],
    lower: float,
    upper: float,
    abs_tol: float = DEFAULT_ABS_TOL,
    *,
    rel_tol: float = 1e-12,
    breakpoints=(),
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integration of ``integrand`` over ``[lower, upper]``.

    ``upper`` may be ``inf``; the last piece is then mapped onto a finite
    interval by the integrator.  Optional interior ``breakpoints`` split the
    range into pieces that are integrated separately, each with an equal
    share of ``abs_tol``.

    Raises
    ------
    QuadratureError
        If any piece exhausts its subdivision budget or the summed error
        estimate exceeds ``abs_tol``.
    """
    if not upper >= lower:
        raise ParameterDomainError(f"need lower <= upper, got [{lower}, {upper}]")
    if lower == upper:
        return QuadratureResult(0.0, 0.0, 0)
    inner = sorted({float(b) for b in breakpoints if lower < b < upper and math.isfinite(b)})
    edges = [float(lower), *inner, float(upper)]
    share = abs_tol / (len(edges) - 1)
    total, total_err, total_sub = 0.0, 0.0, 0
    for a, b in zip(edges[:-1], edges[1:]):
        out = integrate.quad(
            integrand, a, b, epsabs=share, epsrel=rel_tol, limit=_SUBDIVISION_LIMIT, full_output=1
        )
        value, err, info = out[0], out[1], out[2]
        total += value
        total_err += err
        total_sub += int(info["last"])
        if len(out) > 3 and err > share:
            raise QuadratureError(
                "quadrature did not converge",
                lower=a,
                upper=b,
                abs_error_estimate=err,
                subdivisions=int(info["last"]),
                detail=out[3].strip().splitlines()[0] if isinstance(out[3], str) else out[3],
            )
    if not math.isfinite(total) or total_err > abs_tol:
        raise QuadratureError(
            "quadrature error estimate above tolerance",
            lower=lower,
            upper=upper,
            abs_error_estimate=total_err,
            abs_tol=abs_tol,
            subdivisions=total_sub,
        )
    return QuadratureResult(total, total_err, total_sub)


# -- helpers ---------------------------------------------------------------------


def _require_density(model: DistributionModel) -> None:
    if not model.has_density:
        raise UnsupportedError(f"{model.family}: |X| has no density, the exact formulas do not apply")
    # Probe once so that unsupported stable laws fail before integration starts.
    lo, hi = model.abs_support()
    model.abs_cdf(lo + 1.0 if not math.isfinite(hi) else 0.5 * (lo + hi))


def _check_n(n: int) -> int:
    if int(n) != n or n < 2:
        raise ParameterDomainError(f"n must be an integer >= 2, got {n!r}")
    return int(n)


def _quantile_grid(model: DistributionModel, n: int) -> list[float]:
    """Quantiles of ``|X|`` at probabilities that bracket the ``1/n`` scale at both ends."""
    probs = {10.0**-j for j in range(1, 16)}
    for c in (1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0):
        if c / n < 1.0:
            probs.add(c / n)
    probs.update((0.25, 0.5))
    points = []
    for q in sorted(probs):
        points.append(model.abs_ppf(q))
        points.append(model.abs_isf(q))
    return [p for p in points if math.isfinite(p)]


def _powered(base, exponent):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.where(base > 0.0, np.exp(exponent * np.log(np.maximum(base, 1e-320))), 0.0)


# -- exact probabilities ---------------------------------------------------------


def exact_max_ratio_prob(model: DistributionModel, n: int, kappa: float, abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """``P{X_(n-1) <= kappa * X_(n)}`` for the order statistics of ``|X|``.

    Computed as ``n * int F(kappa*y)**(n-1) p(y) dy`` over the support of
    ``|X|`` with ``F``, ``p`` its cdf and density.
    """
    return max_ratio_quadrature(model, n, kappa, abs_tol).value


def max_ratio_quadrature(model, n, kappa, abs_tol=DEFAULT_ABS_TOL) -> QuadratureResult:
    n = _check_n(n)
    kappa = float(kappa)
    if not 0.0 < kappa < 1.0:
        raise ParameterDomainError(f"kappa must lie in (0, 1), got {kappa!r}")
    _require_density(model)
    lo, hi = model.abs_support()
    start = lo / kappa if lo > 0 else lo

    def integrand(y):
        return n * float(_powered(model.abs_cdf(kappa * y), n - 1)) * float(model.abs_pdf(y))

    grid = _quantile_grid(model, n)
    points = grid + [g / kappa for g in grid]
    result = quadrature(integrand, start, hi, abs_tol, breakpoints=points)
    return QuadratureResult(min(1.0, max(0.0, result.value)), result.abs_error_estimate, result.subdivisions)


def exact_min_ratio_prob(model: DistributionModel, n: int, rho: float, abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """``P{X_(2) >= rho * X_(1)}`` for the order statistics of ``|X|``.

    Computed as ``n * int (1 - F(rho*x))**(n-1) p(x) dx``; its complement is
    :func:`exact_min_ratio_complement`.
    """
    return min_ratio_quadrature(model, n, rho, abs_tol).value


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not (rho > 1.0 and math.isfinite(rho)):
        raise ParameterDomainError(f"rho must be a finite number > 1, got {rho!r}")
    return rho


def min_ratio_quadrature(model, n, rho, abs_tol=DEFAULT_ABS_TOL) -> QuadratureResult:
    n = _check_n(n)
    rho = _check_rho(rho)
    _require_density(model)
    lo, hi = model.abs_support()
    stop = min(hi, hi / rho)

    def integrand(x):
        return n * float(_powered(model.abs_sf(rho * x), n - 1)) * float(model.abs_pdf(x))

    grid = _quantile_grid(model, n)
    points = grid + [g / rho for g in grid]
    result = quadrature(integrand, lo, stop, abs_tol, breakpoints=points)
    return QuadratureResult(min(1.0, max(0.0, result.value)), result.abs_error_estimate, result.subdivisions)


def exact_min_ratio_complement(model: DistributionModel, n: int, rho: float, abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """``P{X_(2) < rho * X_(1)}`` by the difference integral.

    ``n * int ((1 - F(x))**(n-1) - (1 - F(rho*x))**(n-1)) p(x) dx``.  This is an
    independent route to one minus :func:`exact_min_ratio_prob`.
    """
    n = _check_n(n)
    rho = _check_rho(rho)
    _require_density(model)
    lo, hi = model.abs_support()

    def integrand(x):
        inner = _powered(model.abs_sf(x), n - 1) - _powered(model.abs_sf(rho * x), n - 1)
        return n * float(inner) * float(model.abs_pdf(x))

    grid = _quantile_grid(model, n)
    points = grid + [g / rho for g in grid]
    result = quadrature(integrand, lo, hi, abs_tol, breakpoints=points)
    return min(1.0, max(0.0, result.value))


# -- limits and references ---------------------------------------------------------


def limit_min_ratio(alpha: float, rho: float) -> float:
    """Large-n limit of ``P{X_(2) <= rho * X_(1)}``: ``1 - rho**(-alpha)``."""
    if not alpha > 0:
        raise ParameterDomainError(f"alpha must be positive, got {alpha!r}")
    rho = float(rho)
    if not rho > 1.0:
        raise ParameterDomainError(f"rho must exceed 1, got {rho!r}")
    if math.isinf(rho) or math.isinf(alpha):
        return 1.0
    return -math.expm1(-alpha * math.log(rho))


def limit_max_ratio(alpha: float, kappa: float) -> float:
    """Large-n limit of ``P{X_(n-1) <= kappa * X_(n)}``: ``kappa**alpha``.

    ``alpha = inf`` stands for light or bounded tails and gives 0.
    """
    if not alpha > 0:
        raise ParameterDomainError(f"alpha must be positive, got {alpha!r}")
    kappa = float(kappa)
    if not 0.0 < kappa < 1.0:
        raise ParameterDomainError(f"kappa must lie in (0, 1), got {kappa!r}")
    if math.isinf(alpha):
        return 0.0
    return kappa**alpha


def gaussian_first_kind_reference(k: float) -> float:
    """``2 * (1 - Phi(k))``, the large-n first-kind rate of a Gaussian sample."""
    if k < 0:
        raise ParameterDomainError(f"k must be nonnegative, got {k!r}")
    return float(special.erfc(k / math.sqrt(2.0)))


def gaussian_first_kind_finite_n(n: int, k: float) -> float:
    """Exact ``P{|X_1 - xbar_n| > k s_n}`` for a Gaussian sample of size ``n``.

    With the 1/n variance, ``n/(n-1) * (X_1 - xbar)**2 / sum (X_j - xbar)**2``
    is Beta(1/2, (n-2)/2), so the event is ``B > k**2/(n-1)``.  For ``n = 2``
    the ratio ``|X_1 - xbar|/s_n`` is identically 1.
    """
    n = _check_n(n)
    if k < 0:
        raise ParameterDomainError(f"k must be nonnegative, got {k!r}")
    if n == 2:
        return 1.0 if k < 1.0 else 0.0
    threshold = k * k / (n - 1)
    if threshold >= 1.0:
        return 0.0
    return float(special.betaincc(0.5, 0.5 * (n - 2), threshold))


def joint_extreme_pair_density(model: DistributionModel, n: int, x: float, y: float, which: str) -> float:
    """Joint density of two adjacent extreme order statistics of ``|X|`` at ``x <= y``.

    ``which="min-pair"``: ``(X_(1), X_(2))`` with density
    ``n(n-1) (1 - F(y))**(n-2) p(x) p(y)``.
    ``which="max-pair"``: ``(X_(n-1), X_(n))`` with density
    ``n(n-1) F(x)**(n-2) p(x) p(y)``.
    """
    n = _check_n(n)
    if x > y:
        raise ParameterDomainError(f"joint density needs x <= y, got x={x!r}, y={y!r}")
    _require_density(model)
    px = float(model.abs_pdf(x))
    py = float(model.abs_pdf(y))
    if which == "min-pair":
        power = float(_powered(model.abs_sf(y), n - 2)) if n > 2 else 1.0
    elif which == "max-pair":
        power = float(_powered(model.abs_cdf(x), n - 2)) if n > 2 else 1.0
    else:
        raise ParameterDomainError(f"which must be 'min-pair' or 'max-pair', got {which!r}")
    return n * (n - 1) * power * px * py
