"""Scalar diffusions, positive eigenfunctions of their generators, and the
ballistic super-diffusive transition density.

A diffusion ``dX = b(X) dt + sigma dW`` has generator
``L = (sigma**2 / 2) d2/dx2 + b(x) d/dx``.  A positive solution of
``L h = lam * h`` tilts the process into the dual diffusion with drift
``b + sigma**2 (log h)'`` and transition density
``exp(-lam t) h(x) / h(x0) * q(x)``.  Two such families are provided:

* ``BALLISTIC_COSH``: ``b = 0``, ``sigma = 1``, ``h = cosh(sqrt(2 lam) x)``.
  The dual is the ballistic process
  ``dX = sqrt(2 lam) tanh(sqrt(2 lam) X) dt + dW``, whose law is a fair mixture
  of Brownian motions drifting at ``+-sqrt(2 lam)``.
* ``HERMITE_F11``: ``b(x) = x``, ``sigma = sqrt(2)``,
  ``h = exp(-x**2/2) 1F1((1 + lam)/2; 1/2; x**2/2)``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EvaluationFailure, InvalidParameter
from .specialfn import DEFAULT_SERIES, SeriesControl, gauss_pdf, hyp1f1, hyp1f1_and_da, norm_cdf

__all__ = [
    "RiskParam",
    "check_risk",
    "DiffusionSpec",
    "brownian",
    "linear_drift",
    "EigenKind",
    "EigenFamily",
    "ballistic_family",
    "hermite_family",
    "GaussianMixture",
    "ballistic_drift",
    "ballistic_tpd",
    "ballistic_tpd_mixture",
    "bernoulli_mixture",
    "dual_drift",
    "hermite_h",
    "eigen_R",
    "generator_residual",
]

RiskParam = float

_CHECK_GRID = np.linspace(-5.0, 5.0, 101)


def check_risk(lam: float, *, positive: bool = False) -> float:
    """Validate a risk parameter and return it as a float."""
    lam = float(lam)
    if not math.isfinite(lam) or lam < 0 or (positive and lam == 0):
        bound = "> 0" if positive else ">= 0"
        raise InvalidParameter(f"risk parameter lambda must be finite and {bound}, got {lam}")
    return lam


def _check_time(t: float) -> float:
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise InvalidParameter(f"time must be finite and > 0, got {t}")
    return t


@dataclass(frozen=True)
class DiffusionSpec:
    """``dX = drift(X) dt + sigma dW``.

    ``drift`` (and ``drift_antiderivative`` when given) must accept floats
    and numpy arrays.  Declared antisymmetry and the antiderivative are
    checked on a grid over ``[-5, 5]`` at construction.
    """

    drift: Callable
    sigma: float
    drift_antiderivative: Optional[Callable] = None
    antisymmetric_drift: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise InvalidParameter(f"sigma must be finite and >= 0, got {self.sigma}")
        b = np.asarray(self.drift(_CHECK_GRID), dtype=float) * np.ones_like(_CHECK_GRID)
        if self.antisymmetric_drift:
            scale = np.maximum(1.0, np.abs(b))
            if abs(float(self.drift(0.0))) > 1e-12 or np.any(np.abs(b + b[::-1]) > 1e-12 * scale):
                raise InvalidParameter("drift declared antisymmetric but b(x) + b(-x) != 0")
        if self.drift_antiderivative is not None:
            step = 1e-5
            big = self.drift_antiderivative
            fd = (np.asarray(big(_CHECK_GRID + step)) - np.asarray(big(_CHECK_GRID - step))) / (2 * step)
            if np.any(np.abs(fd - b) > 1e-6 * np.maximum(1.0, np.abs(b))):
                raise InvalidParameter("drift_antiderivative' does not match drift")

    def same_operator(self, other: "DiffusionSpec") -> bool:
        """True when both specs share sigma and agree on the drift over a grid."""
        if self.sigma != other.sigma:
            return False
        mine = np.asarray(self.drift(_CHECK_GRID), dtype=float) * np.ones_like(_CHECK_GRID)
        theirs = np.asarray(other.drift(_CHECK_GRID), dtype=float) * np.ones_like(_CHECK_GRID)
        return bool(np.allclose(mine, theirs, rtol=1e-12, atol=1e-12))


def brownian(sigma: float = 1.0) -> DiffusionSpec:
    """Driftless diffusion."""
    return DiffusionSpec(
        drift=lambda x: 0.0 * np.asarray(x, dtype=float),
        sigma=sigma,
        drift_antiderivative=lambda x: 0.0 * np.asarray(x, dtype=float),
        antisymmetric_drift=True,
    )


def linear_drift(k: float, sigma: float) -> DiffusionSpec:
    """``b(x) = k x`` (mean-reverting for ``k < 0``)."""
    return DiffusionSpec(
        drift=lambda x: k * np.asarray(x, dtype=float),
        sigma=sigma,
        drift_antiderivative=lambda x: 0.5 * k * np.asarray(x, dtype=float) ** 2,
        antisymmetric_drift=True,
    )


class EigenKind(enum.Enum):
    BALLISTIC_COSH = "ballistic"
    HERMITE_F11 = "hermite"


def _log_cosh(y):
    y = np.abs(y)
    return y + np.log1p(np.exp(-2.0 * y)) - math.log(2.0)


def _scalar_or_array(fn, x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return fn(float(arr))
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


@dataclass(frozen=True)
class EigenFamily:
    """Positive solution ``h`` of ``L h = lam h`` for one of the built-in bases.

    ``h`` is normalized so that ``h(0) = 1`` and ``R = dh/dlam`` vanishes at
    the origin for both kinds.
    """

    kind: EigenKind
    lam: float
    base: DiffusionSpec
    series: SeriesControl = field(default=DEFAULT_SERIES)

    def __post_init__(self):
        check_risk(self.lam)
        expected = _BASES[self.kind]()
        if not self.base.same_operator(expected):
            raise InvalidParameter(f"{self.kind.name} needs base drift/sigma of its own operator")

    @property
    def rate(self) -> float:
        """``sqrt(2 lam)``, the ballistic drift amplitude."""
        return math.sqrt(2.0 * self.lam)

    @property
    def hermite_a(self) -> float:
        return 0.5 * (1.0 + self.lam)

    # -- h and its derivatives -------------------------------------------
    def h(self, x):
        if self.kind is EigenKind.BALLISTIC_COSH:
            out = np.cosh(self.rate * np.asarray(x, dtype=float))
            return float(out) if np.ndim(out) == 0 else out
        return _scalar_or_array(self._hermite_h, x)

    def R(self, x):
        """``dh/dlam`` at fixed ``x``."""
        if self.kind is EigenKind.BALLISTIC_COSH:
            x = np.asarray(x, dtype=float)
            if self.lam == 0.0:
                out = x * x
            else:
                a = self.rate
                out = x * np.sinh(a * x) / a
            return float(out) if out.ndim == 0 else out
        return _scalar_or_array(self._hermite_R, x)

    def log_h_prime(self, x):
        """``(log h)'(x)`` in closed form."""
        if self.kind is EigenKind.BALLISTIC_COSH:
            a = self.rate
            out = a * np.tanh(a * np.asarray(x, dtype=float))
            return float(out) if np.ndim(out) == 0 else out
        return _scalar_or_array(self._hermite_log_h_prime, x)

    def _hermite_h(self, x: float) -> float:
        z = 0.5 * x * x
        out = math.exp(-z) * hyp1f1(self.hermite_a, 0.5, z, self.series)
        if not (out > 0 and math.isfinite(out)):
            raise EvaluationFailure(f"Hermite eigenfunction not representable at x={x}")
        return out

    def _hermite_R(self, x: float) -> float:
        z = 0.5 * x * x
        _, dm = hyp1f1_and_da(self.hermite_a, 0.5, z, self.series)
        # d/dlam = (1/2) d/da
        out = 0.5 * math.exp(-z) * dm
        if not math.isfinite(out):
            raise EvaluationFailure(f"Hermite risk derivative not representable at x={x}")
        return out

    def _hermite_log_h_prime(self, x: float) -> float:
        a = self.hermite_a
        z = 0.5 * x * x
        m = hyp1f1(a, 0.5, z, self.series)
        m1 = hyp1f1(a + 1.0, 1.5, z, self.series)
        if not (math.isfinite(m) and math.isfinite(m1) and math.exp(-z) > 0):
            raise EvaluationFailure(f"Hermite eigenfunction underflows at x={x}")
        # d/dx 1F1(a, b, x^2/2) = x (a/b) 1F1(a+1, b+1, x^2/2)
        return -x + x * (a / 0.5) * m1 / m

    # -- transition densities ---------------------------------------------
    def base_variance(self, t: float) -> float:
        """Variance at time ``t`` of the base process started at 0."""
        t = _check_time(t)
        if self.kind is EigenKind.BALLISTIC_COSH:
            return t
        return math.expm1(2.0 * t)

    def base_tpd(self, x, t: float):
        """``q(0, 0 | x, t)`` of the base (untilted) process."""
        return gauss_pdf(x, 0.0, self.base_variance(t))

    def dual_tpd(self, x, t: float):
        """``exp(-lam t) h(x) / h(0) q(0, 0 | x, t)``."""
        return math.exp(-self.lam * t) * self.h(x) * self.base_tpd(x, t)


def _ballistic_base() -> DiffusionSpec:
    return brownian(1.0)


def _hermite_base() -> DiffusionSpec:
    return linear_drift(1.0, math.sqrt(2.0))


_BASES = {EigenKind.BALLISTIC_COSH: _ballistic_base, EigenKind.HERMITE_F11: _hermite_base}


def ballistic_family(lam: float) -> EigenFamily:
    return EigenFamily(EigenKind.BALLISTIC_COSH, check_risk(lam), _ballistic_base())


def hermite_family(lam: float, series: SeriesControl = DEFAULT_SERIES) -> EigenFamily:
    return EigenFamily(EigenKind.HERMITE_F11, check_risk(lam), _hermite_base(), series)


@dataclass(frozen=True)
class GaussianMixture:
    """Finite mixture of normals; ``components`` holds ``(weight, mean, var)``."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), float(m), float(v)) for w, m, v in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise InvalidParameter("mixture needs at least one component")
        if any(not (0.0 <= w <= 1.0) for w, _, _ in comps):
            raise InvalidParameter("mixture weights must lie in [0, 1]")
        if abs(math.fsum(w for w, _, _ in comps) - 1.0) > 1e-15:
            raise InvalidParameter("mixture weights must sum to 1")
        if any(not v > 0 for _, _, v in comps):
            raise InvalidParameter("mixture variances must be positive")

    def pdf(self, x):
        return sum(w * gauss_pdf(x, m, v) for w, m, v in self.components)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = sum(w * norm_cdf((x - m) / math.sqrt(v)) for w, m, v in self.components)
        return float(out) if np.ndim(out) == 0 else out

    def mean(self) -> float:
        return math.fsum(w * m for w, m, _ in self.components)

    def var(self) -> float:
        mu = self.mean()
        return math.fsum(w * (v + (m - mu) ** 2) for w, m, v in self.components)


def ballistic_drift(x, lam: float):
    """``sqrt(2 lam) tanh(sqrt(2 lam) x)``; saturates at ``+-sqrt(2 lam)``."""
    a = math.sqrt(2.0 * check_risk(lam))
    if a == 0.0:
        out = np.zeros_like(np.asarray(x, dtype=float))
    else:
        out = a * np.tanh(a * np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def ballistic_tpd(x, t: float, lam: float):
    """Transition density of the ballistic process from ``(0, 0)``.

    Evaluates ``exp(-lam t) (2 pi t)**-0.5 cosh(sqrt(2 lam) x) exp(-x**2 / 2t)``
    with the hyperbolic cosine taken in log form, so large ``|x|`` neither
    overflows nor loses the Gaussian factor.
    """
    t = _check_time(t)
    lam = check_risk(lam)
    x = np.asarray(x, dtype=float)
    a = math.sqrt(2.0 * lam)
    expo = _log_cosh(a * x) - x * x / (2.0 * t) - lam * t
    out = np.exp(expo) / math.sqrt(2.0 * math.pi * t)
    return float(out) if out.ndim == 0 else out


def bernoulli_mixture(lam: float, t: float) -> GaussianMixture:
    """The ballistic law at time ``t`` as two equally weighted drifted Gaussians."""
    t = _check_time(t)
    shift = math.sqrt(2.0 * check_risk(lam)) * t
    return GaussianMixture(((0.5, -shift, t), (0.5, shift, t)))


def ballistic_tpd_mixture(x, t: float, lam: float):
    """``ballistic_tpd`` via its Bernoulli mixture representation."""
    return bernoulli_mixture(lam, t).pdf(x)


def dual_drift(spec: DiffusionSpec, fam: EigenFamily) -> Callable:
    """Drift ``x -> b(x) + sigma**2 (log h)'(x)`` of the h-transformed process."""
    if not spec.same_operator(fam.base):
        raise InvalidParameter("diffusion spec does not match the eigenfamily's base operator")
    b = spec.drift
    s2 = spec.sigma ** 2

    def drift(x):
        if fam.kind is EigenKind.HERMITE_F11:
            hx = fam.h(x)
            if np.any(np.asarray(hx) <= 0):
                raise EvaluationFailure("eigenfunction underflowed to zero")
        return b(x) + s2 * fam.log_h_prime(x)

    return drift


def hermite_h(lam: float, x, series: SeriesControl = DEFAULT_SERIES):
    """Even positive eigenfunction of ``d2/dx2 + x d/dx`` with eigenvalue ``lam``."""
    return hermite_family(lam, series).h(x)


def eigen_R(fam: EigenFamily, x):
    """Risk derivative ``dh/dlam`` of the family's eigenfunction."""
    return fam.R(x)


def generator_residual(fam: EigenFamily, x, step: float = 1e-3):
    """``L h - lam h`` with ``h''`` and ``h'`` from central differences."""
    x = np.asarray(x, dtype=float)
    h0 = np.asarray(fam.h(x), dtype=float)
    hp = np.asarray(fam.h(x + step), dtype=float)
    hm = np.asarray(fam.h(x - step), dtype=float)
    d2 = (hp - 2.0 * h0 + hm) / (step * step)
    d1 = (hp - hm) / (2.0 * step)
    gen = 0.5 * fam.base.sigma ** 2 * d2 + np.asarray(fam.base.drift(x), dtype=float) * d1
    out = gen - fam.lam * h0
    return float(out) if out.ndim == 0 else out
