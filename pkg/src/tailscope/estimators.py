"""Sample statistics and Monte Carlo estimators for the three outlier notions.

Variances use the 1/n divisor throughout (``numpy.var`` default, *not* the
``ddof=1`` convention of most statistics packages).

Monte Carlo replicate ``r`` draws its sample from the stream
``(seed, r)`` (see :mod:`tailscope.rng`), so ``sample(model, n, seed, r)``
reproduces exactly the data replicate ``r`` saw.  Replicates are processed in
fixed-size blocks that may run on several threads; event counts are keyed by
block and summed, so results do not depend on the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distributions import DistributionModel, SampleBatch
from .errors import BoundaryError, DegenerateSampleError, EmptyInputError, ParameterDomainError
from .rng import replicate_generator, thread_count

__all__ = [
    "OrderedAbsSample",
    "EstimateWithCI",
    "CenterRate",
    "summary_stats",
    "first_kind_rate",
    "first_kind_prob_mc",
    "max_ratio_event",
    "max_ratio_prob_mc",
    "min_ratio_event",
    "min_ratio_prob_mc",
    "stability_index_estimate",
    "stability_index_mc",
    "beta_outlier_test",
    "multimodal_first_kind",
    "replicate_events",
]

Z99 = 2.5758293035489004  # two-sided 99% normal quantile

# Upper bound on values held in memory per block of replicates.
_BLOCK_VALUES = 1 << 19


def _values(sample) -> np.ndarray:
    if isinstance(sample, SampleBatch):
        return np.asarray(sample.values, dtype=float)
    return np.asarray(sample, dtype=float).ravel()


@dataclass(frozen=True)
class OrderedAbsSample:
    """Absolute values of a sample sorted ascending."""

    values: np.ndarray

    @classmethod
    def from_sample(cls, sample) -> OrderedAbsSample:
        ordered = np.sort(np.abs(_values(sample)))
        ordered.setflags(write=False)
        return cls(ordered)

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class EstimateWithCI:
    estimate: float
    replicates: int
    std_error: float
    ci99_low: float
    ci99_high: float
    degenerate_count: int = 0

    @classmethod
    def from_counts(cls, events: int, replicates: int, degenerate: int = 0) -> EstimateWithCI:
        p = events / replicates
        se = math.sqrt(p * (1.0 - p) / replicates)
        return cls(p, replicates, se, max(0.0, p - Z99 * se), min(1.0, p + Z99 * se), degenerate)

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.estimate - value) <= n_se * self.std_error


def summary_stats(sample) -> tuple[float, float]:
    """Empirical mean and 1/n variance (two-pass)."""
    x = _values(sample)
    if x.size == 0:
        raise EmptyInputError("summary_stats of an empty sample")
    mean = float(np.mean(x))
    dev = x - mean
    return mean, float(np.mean(dev * dev))


def first_kind_rate(sample, k: float) -> float:
    """Fraction of observations with ``|X_j - xbar| > k * s``."""
    x = _values(sample)
    if x.size == 0:
        raise EmptyInputError("first_kind_rate of an empty sample")
    mean, var = summary_stats(x)
    if var == 0.0:
        raise DegenerateSampleError("sample has zero empirical variance")
    s = math.sqrt(var)
    return float(np.count_nonzero(np.abs(x - mean) > k * s)) / x.size


def max_ratio_event(ordered: OrderedAbsSample, kappa: float) -> bool:
    """Whether the largest value is an outlier of order ``1/kappa``: ``X_(n-1) <= kappa X_(n)``."""
    v = ordered.values
    if len(v) < 2:
        raise ParameterDomainError("max_ratio_event needs at least two observations")
    return bool(v[-2] <= kappa * v[-1])


def min_ratio_event(ordered: OrderedAbsSample, rho: float) -> bool:
    """Whether ``X_(2) >= rho X_(1)``."""
    v = ordered.values
    if len(v) < 2:
        raise ParameterDomainError("min_ratio_event needs at least two observations")
    return bool(v[1] >= rho * v[0])


# -- Monte Carlo engine ------------------------------------------------------------

Statistic = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray | None]"]


def replicate_events(
    model: DistributionModel,
    n: int,
    replicates: int,
    seed: int,
    statistic: Statistic,
    threads: int | None = None,
) -> tuple[int, int]:
    """Count replicates whose sample satisfies ``statistic``.

    ``statistic`` maps a ``(block, n)`` array of samples to a boolean event
    array and an optional boolean degenerate array.  Returns
    ``(events, degenerate)``.
    """
    n = int(n)
    replicates = int(replicates)
    block = max(1, min(replicates, _BLOCK_VALUES // n))
    starts = range(0, replicates, block)

    def run(start: int) -> tuple[int, int]:
        stop = min(start + block, replicates)
        data = np.empty((stop - start, n))
        for row, r in enumerate(range(start, stop)):
            data[row] = model.draw(replicate_generator(seed, r), n)
        events, degenerate = statistic(data)
        return int(np.count_nonzero(events)), int(np.count_nonzero(degenerate)) if degenerate is not None else 0

    workers = thread_count() if threads is None else max(1, int(threads))
    if workers == 1 or len(starts) == 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def _check_mc(n: int, replicates: int, min_n: int = 2) -> None:
    if int(n) != n or n < min_n:
        raise ParameterDomainError(f"n must be an integer >= {min_n}, got {n!r}")
    if int(replicates) != replicates or replicates < 1:
        raise ParameterDomainError(f"replicates must be a positive integer, got {replicates!r}")


def first_kind_prob_mc(model, n, k, replicates, seed, threads=None) -> EstimateWithCI:
    """Estimate ``P{|X_1 - xbar_n| > k s_n}``.

    ``X_1`` is the first draw of each replicate and ``xbar_n``, ``s_n`` come
    from the full sample including it.  Replicates with ``s_n = 0`` count as
    non-events and are reported in ``degenerate_count``.
    """
    _check_mc(n, replicates)
    if k < 0:
        raise ParameterDomainError(f"k must be nonnegative, got {k!r}")

    def stat(x):
        mean = x.mean(axis=1)
        dev = x - mean[:, None]
        s = np.sqrt(np.einsum("ij,ij->i", dev, dev) / x.shape[1])
        degenerate = s == 0.0
        return (np.abs(dev[:, 0]) > k * s) & ~degenerate, degenerate

    events, degenerate = replicate_events(model, n, replicates, seed, stat, threads)
    return EstimateWithCI.from_counts(events, int(replicates), degenerate)


def max_ratio_prob_mc(model, n, kappa, replicates, seed, threads=None) -> EstimateWithCI:
    """Estimate ``P{X_(n-1) <= kappa X_(n)}`` over ``|X|``."""
    _check_mc(n, replicates)
    if not 0.0 < kappa <= 1.0:
        raise ParameterDomainError(f"kappa must lie in (0, 1], got {kappa!r}")
    n = int(n)

    def stat(x):
        top = np.partition(np.abs(x), (n - 2, n - 1), axis=1)
        return top[:, n - 2] <= kappa * top[:, n - 1], None

    events, _ = replicate_events(model, n, replicates, seed, stat, threads)
    return EstimateWithCI.from_counts(events, int(replicates))


def min_ratio_prob_mc(model, n, rho, replicates, seed, threads=None) -> EstimateWithCI:
    """Estimate ``P{X_(2) >= rho X_(1)}`` over ``|X|``."""
    _check_mc(n, replicates)
    if not rho >= 1.0:
        raise ParameterDomainError(f"rho must be at least 1, got {rho!r}")

    def stat(x):
        low = np.partition(np.abs(x), (0, 1), axis=1)
        return low[:, 1] >= rho * low[:, 0], None

    events, _ = replicate_events(model, n, replicates, seed, stat, threads)
    return EstimateWithCI.from_counts(events, int(replicates))


def stability_index_estimate(p_hat: float, kappa: float) -> float:
    """Invert ``p = kappa**alpha``: ``alpha = ln p / ln kappa``."""
    if not 0.0 < kappa < 1.0:
        raise ParameterDomainError(f"kappa must lie in (0, 1), got {kappa!r}")
    if p_hat <= 0.0 or p_hat >= 1.0:
        raise BoundaryError(f"p_hat={p_hat!r} gives no finite stability index")
    return math.log(p_hat) / math.log(kappa)


def stability_index_mc(model, n, kappa, replicates, seed, threads=None) -> tuple[float, float, EstimateWithCI]:
    """Estimate the stability index from simulated outlier-of-order-1/kappa frequencies.

    Returns ``(alpha_hat, alpha_se, p_estimate)`` with the delta-method
    standard error ``se_p / (p_hat |ln kappa|)``.
    """
    est = max_ratio_prob_mc(model, n, kappa, replicates, seed, threads)
    alpha = stability_index_estimate(est.estimate, kappa)
    se = est.std_error / (est.estimate * abs(math.log(kappa)))
    return alpha, se, est


def beta_outlier_test(model: DistributionModel, x: float, beta: float) -> bool:
    """Whether ``x`` is a beta-outlier under ``model``.

    Two-sided: true iff ``min(P{X <= x}, P{X >= x}) <= beta / 2``.
    """
    if not 0.0 <= beta <= 1.0:
        raise ParameterDomainError(f"beta must be a probability, got {beta!r}")
    lower = float(model.cdf(x))
    upper = float(model.sf(x)) + float(model.atom_mass(x))
    return min(lower, upper) <= 0.5 * beta


@dataclass(frozen=True)
class CenterRate:
    center: float
    rate: float | None
    degenerate: bool = False


def multimodal_first_kind(sample, centers: Sequence[float], k: float) -> list[CenterRate]:
    """First-kind rate of ``|X - a|`` for each center ``a``.

    A center whose transformed sample has zero variance is flagged
    ``degenerate`` with ``rate=None``.
    """
    x = _values(sample)
    if x.size < 2:
        raise ParameterDomainError("multimodal_first_kind needs at least two observations")
    out = []
    for a in centers:
        try:
            out.append(CenterRate(float(a), first_kind_rate(np.abs(x - a), k)))
        except DegenerateSampleError:
            out.append(CenterRate(float(a), None, True))
    return out
