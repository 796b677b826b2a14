"""Distribution families, sampling, and the two constructive procedures.

Every model is an immutable dataclass.  Besides the usual ``cdf``/``sf``/``pdf``
each model exposes the law of ``|X|`` through the ``abs_*`` methods, because the
order-statistic machinery works on absolute values throughout.

Conventions
-----------
- ``cdf`` is right-continuous; ``atom_mass(x)`` gives ``P{X = x}`` so the left
  limit is ``cdf(x) - atom_mass(x)``.
- ``pdf`` raises :class:`AtomicPointError` at atoms instead of returning
  infinities.
- Symmetric stable laws use scale 1, skew 0, location 0, i.e. characteristic
  function ``exp(-|t|**alpha)``.  Only ``alpha in {1, 2}`` have a ``cdf``/``pdf``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np
from scipy import optimize, special

from .errors import AtomicPointError, ParameterDomainError, UnsupportedError
from .rng import replicate_generator

__all__ = [
    "DistributionModel",
    "Gaussian",
    "Laplace",
    "SymmetricStable",
    "Pareto",
    "SymmetricPareto",
    "ReciprocalPareto",
    "SymmetricReciprocalPareto",
    "PutTailDown",
    "ThreePointExtremal",
    "SampleBatch",
    "sample",
    "cdf",
    "pdf",
    "put_tail_down",
    "ptd_tail_probability",
    "ptd_outlier_gain_condition",
    "selberg_bound",
    "extremal_three_point",
    "reciprocal_pareto_stats",
    "model_from_dict",
    "parse_model",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ParameterDomainError(f"{name} must be a finite positive number, got {value!r}")
    return value


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterDomainError(f"{name} must be finite, got {value!r}")
    return value


def _set(obj, name, value):
    object.__setattr__(obj, name, value)


def _fmt(value: float) -> str:
    return repr(float(value))


class DistributionModel:
    """Common surface of every supported law.

    Subclasses are frozen dataclasses.  Methods accept scalars or arrays where
    the closed form vectorizes.
    """

    family: ClassVar[str] = ""
    symmetric: ClassVar[bool] = False
    has_density: ClassVar[bool] = True

    # -- law of X ---------------------------------------------------------
    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        """``P{X > x}``."""
        return 1.0 - self.cdf(x)

    def logsf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.sf(x))

    def pdf(self, x):
        raise NotImplementedError

    def atom_mass(self, x) -> float:
        return 0.0

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    # -- law of |X| -------------------------------------------------------
    def abs_support(self) -> tuple[float, float]:
        return 0.0, math.inf

    def abs_cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, self.cdf(x) - self.cdf(-x) + self.atom_mass_abs(x))

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, self.sf(x) + self.cdf(-x) - self.atom_mass_abs(x))

    def atom_mass_abs(self, x):
        return 0.0

    def abs_pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, self.pdf(x) + self.pdf(-x))

    def abs_ppf(self, q: float) -> float:
        """Quantile of ``|X|`` at lower-tail probability ``q``."""
        return self._invert(lambda t: float(self.abs_cdf(t)) - q, q)

    def abs_isf(self, q: float) -> float:
        """Quantile of ``|X|`` at upper-tail probability ``q``."""
        return self._invert(lambda t: q - float(self.abs_sf(t)), 1.0 - q)

    def _invert(self, fn, q: float) -> float:
        lo, hi = self.abs_support()
        if q <= 0.0:
            return lo
        if q >= 1.0:
            return hi
        a = lo
        b = hi if math.isfinite(hi) else max(1.0, lo * 2.0)
        while fn(b) < 0.0:
            a, b = b, b * 4.0
            if b > 1e300:
                return math.inf
        return optimize.brentq(fn, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    def tail_index(self) -> float | None:
        """Tail exponent of ``|X|`` at infinity; ``inf`` for light or bounded tails."""
        return None

    def zero_index(self) -> float | None:
        """Exponent ``a`` with the density of ``|X|`` regularly varying of index ``a - 1`` at 0."""
        return None

    # -- serialization ----------------------------------------------------
    def params(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        params = {}
        for key, value in self.params().items():
            params[key] = value.to_dict() if isinstance(value, DistributionModel) else value
        return {"family": self.family, "params": params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def describe(self) -> str:
        """Compact ``family:key=value,...`` form accepted by :func:`parse_model`."""
        return f"{self.family}:{self._args()}"

    def _args(self) -> str:
        parts = []
        for key, value in self.params().items():
            if isinstance(value, DistributionModel):
                parts.append(f"{key}={value.family}({value._args()})")
            else:
                parts.append(f"{key}={_fmt(value)}")
        return ",".join(parts)


@dataclass(frozen=True)
class Gaussian(DistributionModel):
    mu: float = 0.0
    sigma: float = 1.0

    family: ClassVar[str] = "gaussian"

    def __post_init__(self):
        _set(self, "mu", _finite("mean", self.mu))
        _set(self, "sigma", _positive("sigma", self.sigma))

    @property
    def symmetric(self) -> bool:  # type: ignore[override]
        return self.mu == 0.0

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.mu) / self.sigma

    def cdf(self, x):
        return special.ndtr(self._z(x))

    def sf(self, x):
        return special.ndtr(-self._z(x))

    def logsf(self, x):
        return special.log_ndtr(-self._z(x))

    def pdf(self, x):
        z = self._z(x)
        return np.exp(-0.5 * z * z) * (_INV_SQRT_2PI / self.sigma)

    def mean(self) -> float:
        return self.mu

    def variance(self) -> float:
        return self.sigma**2

    def draw(self, rng, n):
        return self.mu + self.sigma * rng.standard_normal(n)

    def abs_cdf(self, x):
        if self.mu != 0.0:
            return super().abs_cdf(x)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, special.erf(np.maximum(x, 0.0) / (self.sigma * _SQRT2)))

    def abs_sf(self, x):
        if self.mu != 0.0:
            return super().abs_sf(x)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, special.erfc(np.maximum(x, 0.0) / (self.sigma * _SQRT2)))

    def abs_ppf(self, q):
        if self.mu != 0.0:
            return super().abs_ppf(q)
        return float(self.sigma * _SQRT2 * special.erfinv(q))

    def abs_isf(self, q):
        if self.mu != 0.0:
            return super().abs_isf(q)
        return float(self.sigma * _SQRT2 * special.erfcinv(q))

    def tail_index(self):
        return math.inf

    def zero_index(self):
        return 1.0

    def params(self):
        return {"mean": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Laplace(DistributionModel):
    """Laplace law centred at 0 with scale ``b``; the exponential-tail base."""

    b: float = 1.0

    family: ClassVar[str] = "laplace"
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        _set(self, "b", _positive("b", self.b))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0.0) / self.b),
                        1.0 - 0.5 * np.exp(-np.maximum(x, 0.0) / self.b))

    def sf(self, x):
        return self.cdf(-np.asarray(x, dtype=float))

    def logsf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, math.log(0.5) - np.maximum(x, 0.0) / self.b, np.log(self.sf(x)))

    def pdf(self, x):
        return np.exp(-np.abs(np.asarray(x, dtype=float)) / self.b) / (2.0 * self.b)

    def mean(self):
        return 0.0

    def variance(self):
        return 2.0 * self.b**2

    def draw(self, rng, n):
        return rng.laplace(0.0, self.b, n)

    def abs_cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, -np.expm1(-np.maximum(x, 0.0) / self.b))

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, np.exp(-np.maximum(x, 0.0) / self.b))

    def abs_pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, np.exp(-np.maximum(x, 0.0) / self.b) / self.b)

    def abs_ppf(self, q):
        return float(-self.b * math.log1p(-q)) if q < 1 else math.inf

    def abs_isf(self, q):
        return float(-self.b * math.log(q)) if q > 0 else math.inf

    def tail_index(self):
        return math.inf

    def zero_index(self):
        return 1.0

    def params(self):
        return {"b": self.b}


@dataclass(frozen=True)
class SymmetricStable(DistributionModel):
    """Symmetric strictly stable law, characteristic function ``exp(-|t|**alpha)``."""

    alpha: float

    family: ClassVar[str] = "stable"
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        alpha = _positive("alpha", self.alpha)
        if alpha > 2.0:
            raise ParameterDomainError(f"stable alpha must lie in (0, 2], got {alpha!r}")
        _set(self, "alpha", alpha)

    def _closed(self, what: str):
        if self.alpha == 1.0:
            return "cauchy"
        if self.alpha == 2.0:
            return "gauss"
        raise UnsupportedError(
            f"{what} of a symmetric stable law is only available for alpha in {{1, 2}}, "
            f"got alpha={self.alpha!r}"
        )

    # alpha=2 is N(0, 2)
    _GAUSS = Gaussian(0.0, _SQRT2)

    def cdf(self, x):
        if self._closed("cdf") == "cauchy":
            return 0.5 + np.arctan(np.asarray(x, dtype=float)) / math.pi
        return self._GAUSS.cdf(x)

    def sf(self, x):
        if self._closed("cdf") == "cauchy":
            return 0.5 - np.arctan(np.asarray(x, dtype=float)) / math.pi
        return self._GAUSS.sf(x)

    def logsf(self, x):
        if self._closed("cdf") == "gauss":
            return self._GAUSS.logsf(x)
        return super().logsf(x)

    def pdf(self, x):
        if self._closed("pdf") == "cauchy":
            x = np.asarray(x, dtype=float)
            return 1.0 / (math.pi * (1.0 + x * x))
        return self._GAUSS.pdf(x)

    def abs_cdf(self, x):
        if self._closed("cdf") == "gauss":
            return self._GAUSS.abs_cdf(x)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, 2.0 * np.arctan(np.maximum(x, 0.0)) / math.pi)

    def abs_sf(self, x):
        if self._closed("cdf") == "gauss":
            return self._GAUSS.abs_sf(x)
        x = np.asarray(x, dtype=float)
        # 1 - 2/pi*atan(x) = 2/pi*atan(1/x), exact in the far tail
        with np.errstate(divide="ignore"):
            return np.where(x <= 0, 1.0, 2.0 * np.arctan(1.0 / np.maximum(x, 0.0)) / math.pi)

    def abs_pdf(self, x):
        if self._closed("pdf") == "gauss":
            return self._GAUSS.abs_pdf(x)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, 2.0 / (math.pi * (1.0 + x * x)))

    def abs_ppf(self, q):
        if self._closed("cdf") == "gauss":
            return self._GAUSS.abs_ppf(q)
        return math.tan(0.5 * math.pi * q) if q < 1 else math.inf

    def abs_isf(self, q):
        if self._closed("cdf") == "gauss":
            return self._GAUSS.abs_isf(q)
        return 1.0 / math.tan(0.5 * math.pi * q) if q > 0 else math.inf

    def mean(self):
        return 0.0 if self.alpha > 1.0 else math.nan

    def variance(self):
        return 2.0 if self.alpha == 2.0 else math.inf

    def draw(self, rng, n):
        # Chambers-Mallows-Stuck, symmetric case
        v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, n)
        w = rng.standard_exponential(n)
        a = self.alpha
        if a == 1.0:
            return np.tan(v)
        cos_v = np.cos(v)
        return (np.sin(a * v) / cos_v ** (1.0 / a)) * (np.cos((1.0 - a) * v) / w) ** ((1.0 - a) / a)

    def tail_index(self):
        return math.inf if self.alpha == 2.0 else self.alpha

    def zero_index(self):
        return 1.0

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class Pareto(DistributionModel):
    """``F(x) = 1 - (x/xm)**(-alpha)`` on ``[xm, inf)``."""

    alpha: float
    xm: float = 1.0

    family: ClassVar[str] = "pareto"

    def __post_init__(self):
        _set(self, "alpha", _positive("alpha", self.alpha))
        _set(self, "xm", _positive("xm", self.xm))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x < self.xm, 0.0, -np.expm1(-self.alpha * np.log(np.maximum(x, self.xm) / self.xm)))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x < self.xm, 1.0, (np.maximum(x, self.xm) / self.xm) ** (-self.alpha))

    def logsf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x < self.xm, 0.0, -self.alpha * np.log(np.maximum(x, self.xm) / self.xm))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            safe = np.maximum(x, self.xm)
            return np.where(x < self.xm, 0.0, self.alpha / self.xm * (safe / self.xm) ** (-self.alpha - 1.0))

    def mean(self):
        return self.alpha * self.xm / (self.alpha - 1.0) if self.alpha > 1.0 else math.inf

    def variance(self):
        if self.alpha <= 2.0:
            return math.inf
        a = self.alpha
        return a * self.xm**2 / ((a - 1.0) ** 2 * (a - 2.0))

    def draw(self, rng, n):
        return self.xm * (1.0 - rng.random(n)) ** (-1.0 / self.alpha)

    def abs_support(self):
        return self.xm, math.inf

    abs_cdf = cdf
    abs_sf = sf
    abs_pdf = pdf

    def abs_ppf(self, q):
        return self.xm * (1.0 - q) ** (-1.0 / self.alpha) if q < 1 else math.inf

    def abs_isf(self, q):
        return self.xm * q ** (-1.0 / self.alpha) if q > 0 else math.inf

    def tail_index(self):
        return self.alpha

    def params(self):
        return {"alpha": self.alpha, "xm": self.xm}


@dataclass(frozen=True)
class SymmetricPareto(DistributionModel):
    """Random-sign Pareto: ``|X| ~ Pareto(alpha, xm)``; the power-tail base."""

    alpha: float
    xm: float = 1.0

    family: ClassVar[str] = "symmetric-pareto"
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        _set(self, "alpha", _positive("alpha", self.alpha))
        _set(self, "xm", _positive("xm", self.xm))

    @property
    def _abs(self) -> Pareto:
        return Pareto(self.alpha, self.xm)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, 1.0 - 0.5 * self._abs.sf(x), 0.5 * self._abs.sf(-x))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, 0.5 * self._abs.sf(x), 1.0 - 0.5 * self._abs.sf(-x))

    def logsf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, math.log(0.5) + self._abs.logsf(np.abs(x)), np.log(self.sf(x)))

    def pdf(self, x):
        return 0.5 * self._abs.pdf(np.abs(np.asarray(x, dtype=float)))

    def mean(self):
        return 0.0 if self.alpha > 1.0 else math.nan

    def variance(self):
        return self.alpha * self.xm**2 / (self.alpha - 2.0) if self.alpha > 2.0 else math.inf

    def draw(self, rng, n):
        magnitude = self._abs.draw(rng, n)
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return signs * magnitude

    def abs_support(self):
        return self.xm, math.inf

    def abs_cdf(self, x):
        return self._abs.cdf(x)

    def abs_sf(self, x):
        return self._abs.sf(x)

    def abs_pdf(self, x):
        return self._abs.pdf(x)

    def abs_ppf(self, q):
        return self._abs.abs_ppf(q)

    def abs_isf(self, q):
        return self._abs.abs_isf(q)

    def tail_index(self):
        return self.alpha

    def params(self):
        return {"alpha": self.alpha, "xm": self.xm}


@dataclass(frozen=True)
class ReciprocalPareto(DistributionModel):
    """``F(x) = x**alpha`` on ``(0, 1)``; the law of ``1/Z`` for ``Z ~ Pareto(alpha, 1)``."""

    alpha: float

    family: ClassVar[str] = "reciprocal-pareto"

    def __post_init__(self):
        _set(self, "alpha", _positive("alpha", self.alpha))

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return x**self.alpha

    def sf(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        # 1 - x**a without cancellation near x = 1
        with np.errstate(divide="ignore"):
            return -np.expm1(self.alpha * np.log(x))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.alpha * np.where(inside, x, 0.5) ** (self.alpha - 1.0)
        return np.where(inside, val, 0.0)

    def mean(self):
        return self.alpha / (self.alpha + 1.0)

    def variance(self):
        a = self.alpha
        return a / (a + 2.0) - (a / (a + 1.0)) ** 2

    def draw(self, rng, n):
        return (1.0 - rng.random(n)) ** (1.0 / self.alpha)

    def abs_support(self):
        return 0.0, 1.0

    abs_cdf = cdf
    abs_sf = sf
    abs_pdf = pdf

    def abs_ppf(self, q):
        return min(1.0, max(q, 0.0) ** (1.0 / self.alpha))

    def abs_isf(self, q):
        return math.exp(math.log1p(-q) / self.alpha) if q < 1 else 0.0

    def tail_index(self):
        return math.inf

    def zero_index(self):
        return self.alpha

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class SymmetricReciprocalPareto(DistributionModel):
    """Symmetric ``Y`` with ``1/|Y| ~ Pareto(alpha, 1)``: ``P{|Y| <= x} = x**alpha`` on (0, 1)."""

    alpha: float

    family: ClassVar[str] = "symmetric-reciprocal-pareto"
    symmetric: ClassVar[bool] = True

    def __post_init__(self):
        _set(self, "alpha", _positive("alpha", self.alpha))

    @property
    def _abs(self) -> ReciprocalPareto:
        return ReciprocalPareto(self.alpha)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        m = 0.5 * self._abs.cdf(np.abs(x))
        return np.where(x >= 0, 0.5 + m, 0.5 - m)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        m = 0.5 * self._abs.cdf(np.abs(x))
        return np.where(x >= 0, 0.5 - m, 0.5 + m)

    def pdf(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        a = self.alpha
        with np.errstate(divide="ignore"):
            val = np.where(x == 0.0, math.inf if a < 1 else (0.5 if a == 1 else 0.0),
                           0.5 * self._abs.pdf(x))
        return val

    def mean(self):
        return 0.0

    def variance(self):
        return self.alpha / (2.0 + self.alpha)

    def draw(self, rng, n):
        magnitude = self._abs.draw(rng, n)
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return signs * magnitude

    def abs_support(self):
        return 0.0, 1.0

    def abs_cdf(self, x):
        return self._abs.cdf(x)

    def abs_sf(self, x):
        return self._abs.sf(x)

    def abs_pdf(self, x):
        return self._abs.pdf(x)

    def abs_ppf(self, q):
        return self._abs.abs_ppf(q)

    def abs_isf(self, q):
        return self._abs.abs_isf(q)

    def tail_index(self):
        return math.inf

    def zero_index(self):
        return self.alpha

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class PutTailDown(DistributionModel):
    """Mixture ``(1 - p) F + p H`` with ``H`` the unit step at 0.

    Keeps the base tail up to the factor ``1 - p`` while moving mass ``p`` to
    the origin, which shrinks the variance to ``(1 - p) * sigma**2``.
    """

    base: DistributionModel
    p: float

    family: ClassVar[str] = "put-tail-down"
    has_density: ClassVar[bool] = False

    def __post_init__(self):
        if not isinstance(self.base, DistributionModel):
            raise ParameterDomainError("put-tail-down base must be a DistributionModel")
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise ParameterDomainError(f"p must lie in (0, 1), got {p!r}")
        _set(self, "p", p)

    @property
    def symmetric(self) -> bool:  # type: ignore[override]
        return bool(self.base.symmetric)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - self.p) * self.base.cdf(x) + self.p * (x >= 0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - self.p) * self.base.sf(x) + self.p * (x < 0)

    def atom_mass(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - self.p) * self.base.atom_mass(x) + self.p * (x == 0)

    def atom_mass_abs(self, x):
        x = np.asarray(x, dtype=float)
        return self.p * (x == 0)

    def abs_cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, (1.0 - self.p) * self.base.abs_cdf(x) + self.p)

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 1.0, (1.0 - self.p) * self.base.abs_sf(x))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x == 0.0):
            raise AtomicPointError("put-tail-down law has an atom of mass p at 0")
        return (1.0 - self.p) * self.base.pdf(x)

    def abs_pdf(self, x):
        raise AtomicPointError("|X| of a put-tail-down law has an atom at 0; no density")

    def mean(self):
        return (1.0 - self.p) * self.base.mean()

    def variance(self):
        m = self.base.mean()
        second = self.base.variance() + m * m
        return (1.0 - self.p) * second - self.mean() ** 2

    def draw(self, rng, n):
        values = self.base.draw(rng, n)
        zeros = rng.random(n) < self.p
        values[zeros] = 0.0
        return values

    def tail_index(self):
        return self.base.tail_index()

    def params(self):
        return {"base": self.base, "p": self.p}


@dataclass(frozen=True)
class ThreePointExtremal(DistributionModel):
    """Atoms ``-k*sigma, 0, k*sigma`` with masses ``1/(2k^2), 1 - 1/k^2, 1/(2k^2)``.

    Mean 0 and variance ``sigma**2``; it attains the bound
    ``P{|X| >= k*sigma} <= 1/k**2`` with equality.
    """

    sigma: float
    k: float

    family: ClassVar[str] = "three-point-extremal"
    symmetric: ClassVar[bool] = True
    has_density: ClassVar[bool] = False

    def __post_init__(self):
        _set(self, "sigma", _positive("sigma", self.sigma))
        k = _finite("k", self.k)
        if not k > 1.0:
            raise ParameterDomainError(f"k must exceed 1, got {k!r}")
        _set(self, "k", k)

    @property
    def atoms(self) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
        edge = 1.0 / (2.0 * self.k * self.k)
        a = self.k * self.sigma
        return (-a, 0.0, a), (edge, 1.0 - 2.0 * edge, edge)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        locs, masses = self.atoms
        return sum(m * (x >= loc) for loc, m in zip(locs, masses))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        locs, masses = self.atoms
        return sum(m * (x < loc) for loc, m in zip(locs, masses))

    def atom_mass(self, x):
        x = np.asarray(x, dtype=float)
        locs, masses = self.atoms
        return sum(m * (x == loc) for loc, m in zip(locs, masses))

    def atom_mass_abs(self, x):
        x = np.asarray(x, dtype=float)
        locs, masses = self.atoms
        return masses[1] * (x == 0) + 2.0 * masses[0] * (x == locs[2])

    def abs_cdf(self, x):
        x = np.asarray(x, dtype=float)
        locs, masses = self.atoms
        return masses[1] * (x >= 0) + 2.0 * masses[0] * (x >= locs[2])

    def abs_sf(self, x):
        return 1.0 - self.abs_cdf(x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(np.isin(x, self.atoms[0])):
            raise AtomicPointError(f"{x!r} is an atom of the three-point law")
        return np.zeros_like(x)

    def abs_pdf(self, x):
        raise AtomicPointError("three-point law is purely atomic")

    def tail_prob(self, threshold: float) -> float:
        """Exact ``P{|X| >= threshold}`` by summing atom masses."""
        locs, masses = self.atoms
        return math.fsum(m for loc, m in zip(locs, masses) if abs(loc) >= threshold)

    def mean(self):
        locs, masses = self.atoms
        return math.fsum(m * loc for loc, m in zip(locs, masses))

    def variance(self):
        locs, masses = self.atoms
        mu = self.mean()
        return math.fsum(m * (loc - mu) ** 2 for loc, m in zip(locs, masses))

    def draw(self, rng, n):
        locs, masses = self.atoms
        u = rng.random(n)
        out = np.zeros(n)
        out[u < masses[0]] = locs[0]
        out[(u >= masses[0]) & (u < 2.0 * masses[0])] = locs[2]
        return out

    def tail_index(self):
        return math.inf

    def params(self):
        return {"sigma": self.sigma, "k": self.k}


# -- samples -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Observations plus the stream coordinates that reproduce them."""

    values: np.ndarray
    model: DistributionModel
    master_seed: int
    replicate_index: int
    meta: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def sample(model: DistributionModel, n: int, master_seed: int, replicate_index: int = 0) -> SampleBatch:
    """Draw ``n`` i.i.d. values from the stream ``(master_seed, replicate_index)``."""
    if int(n) != n or n < 1:
        raise ParameterDomainError(f"n must be a positive integer, got {n!r}")
    rng = replicate_generator(int(master_seed), int(replicate_index))
    values = np.asarray(model.draw(rng, int(n)), dtype=float)
    values.setflags(write=False)
    return SampleBatch(values, model, int(master_seed), int(replicate_index))


def cdf(model: DistributionModel, x: float) -> float:
    return float(model.cdf(x))


def pdf(model: DistributionModel, x: float) -> float:
    return float(model.pdf(x))


# -- constructive procedures ---------------------------------------------------


def _check_ptd_base(base: DistributionModel) -> float:
    if isinstance(base, Gaussian) and base.mu != 0.0:
        raise ParameterDomainError("put-tail-down needs a base symmetric about 0")
    if not base.symmetric:
        raise ParameterDomainError(f"put-tail-down needs a symmetric base, got {base.family}")
    var = base.variance()
    if not math.isfinite(var):
        raise ParameterDomainError(f"put-tail-down needs a finite second moment, {base.family} has none")
    return var


def put_tail_down(base: DistributionModel, p: float) -> PutTailDown:
    """Move mass ``p`` to the origin while scaling the rest of ``base`` by ``1 - p``."""
    _check_ptd_base(base)
    return PutTailDown(base, p)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ParameterDomainError(f"p must lie in (0, 1), got {p!r}")
    return p


def ptd_tail_probability(base: DistributionModel, p: float, k: float) -> float:
    """``P{|Y_p| > k * sigma_p}`` for the put-tail-down law, in closed form.

    Equals ``2 (1 - p) Fbar(k sqrt(1 - p) sigma)`` with ``Fbar`` the base tail and
    ``sigma`` the base standard deviation.
    """
    p = _check_p(p)
    k = _positive("k", k)
    sigma = math.sqrt(_check_ptd_base(base))
    return float(2.0 * (1.0 - p) * base.sf(k * math.sqrt(1.0 - p) * sigma))


def ptd_outlier_gain_condition(base: DistributionModel, p: float, k: float) -> bool:
    """Whether ``(1 - p) Fbar(k sqrt(1 - p) sigma) > Fbar(k sigma)``.

    Evaluated on log tails so that far-tail values do not underflow to a tie.
    """
    p = _check_p(p)
    k = _positive("k", k)
    sigma = math.sqrt(_check_ptd_base(base))
    lhs = math.log1p(-p) + float(base.logsf(k * math.sqrt(1.0 - p) * sigma))
    rhs = float(base.logsf(k * sigma))
    return bool(lhs > rhs)


def selberg_bound(k: float) -> float:
    """Upper bound ``1/k**2`` on ``P{|X| > k sigma}`` for mean-zero laws."""
    k = _finite("k", k)
    if not k > 1.0:
        raise ParameterDomainError(f"k must exceed 1, got {k!r}")
    return 1.0 / (k * k)


def extremal_three_point(sigma: float, k: float) -> ThreePointExtremal:
    return ThreePointExtremal(sigma, k)


def reciprocal_pareto_stats(alpha: float) -> tuple[float, float]:
    """Variance and ``P{|Y| >= 3 sigma}`` for ``SymmetricReciprocalPareto(alpha)``.

    The tail is ``1 - 3**alpha * (alpha / (2 + alpha))**(alpha / 2)`` while
    ``3 sigma < 1``; beyond that the support is exhausted and the tail is 0.
    """
    alpha = _positive("alpha", alpha)
    variance = alpha / (2.0 + alpha)
    reach = 3.0**alpha * variance ** (alpha / 2.0)
    return variance, max(0.0, 1.0 - reach)


# -- serialization -------------------------------------------------------------

_FAMILIES: dict[str, type[DistributionModel]] = {
    cls.family: cls
    for cls in (
        Gaussian,
        Laplace,
        SymmetricStable,
        Pareto,
        SymmetricPareto,
        ReciprocalPareto,
        SymmetricReciprocalPareto,
        PutTailDown,
        ThreePointExtremal,
    )
}

_FAMILY_ALIASES = {
    "normal": "gaussian",
    "gauss": "gaussian",
    "symmetric-stable": "stable",
    "recpareto": "reciprocal-pareto",
    "symrecpareto": "symmetric-reciprocal-pareto",
    "sympareto": "symmetric-pareto",
    "ptd": "put-tail-down",
    "extremal": "three-point-extremal",
    "three-point": "three-point-extremal",
}

_PARAM_ALIASES = {"gaussian": {"mean": "mu", "mu": "mu"}}


def _family_class(name: str) -> type[DistributionModel]:
    key = name.strip().lower().replace("_", "-")
    key = _FAMILY_ALIASES.get(key, key)
    try:
        return _FAMILIES[key]
    except KeyError:
        raise ParameterDomainError(f"unknown distribution family {name!r}") from None


def _build(cls: type[DistributionModel], params: dict[str, Any]) -> DistributionModel:
    aliases = _PARAM_ALIASES.get(cls.family, {})
    kwargs = {aliases.get(k, k): v for k, v in params.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ParameterDomainError(f"bad parameters for {cls.family}: {exc}") from None


def model_from_dict(data: dict[str, Any]) -> DistributionModel:
    """Inverse of :meth:`DistributionModel.to_dict`."""
    if not isinstance(data, dict) or "family" not in data:
        raise ParameterDomainError(f"model must be an object with a 'family' key, got {data!r}")
    cls = _family_class(str(data["family"]))
    params = dict(data.get("params") or {})
    if "base" in params and isinstance(params["base"], dict):
        params["base"] = model_from_dict(params["base"])
    return _build(cls, params)


def _split_top(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts if p.strip()]


def _parse_args(cls, text: str) -> DistributionModel:
    params: dict[str, Any] = {}
    for item in _split_top(text):
        if "=" not in item:
            raise ParameterDomainError(f"expected key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if key == "base":
            params[key] = parse_model(value)
        else:
            try:
                params[key] = float(value)
            except ValueError:
                raise ParameterDomainError(f"parameter {key!r} is not a number: {value!r}") from None
    return _build(cls, params)


def parse_model(text: str) -> DistributionModel:
    """Parse ``family:key=value,...``, ``family(key=value,...)`` or a JSON object."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return model_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParameterDomainError(f"malformed model JSON: {exc}") from None
    if "(" in text and text.endswith(")") and (":" not in text or text.index("(") < text.index(":")):
        name, _, rest = text.partition("(")
        return _parse_args(_family_class(name), rest[:-1])
    name, _, rest = text.partition(":")
    return _parse_args(_family_class(name), rest)
