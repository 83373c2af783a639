"""Stationary Fokker-Planck measures and the certainty-equivalence classifier.

White-noise forcing of ``dX = b(X) dt + sigma dW`` gives the stationary
density ``exp(2 B(x) / sigma**2)`` with ``B' = b``.  Forcing through the
ballistic process instead tilts it by a hyperbolic cosine, which can turn a
single-peaked law into a two-peaked one; ``curvature_origin`` predicts the
switch from the sign of the log-curvature at 0.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameter, NotNormalizable
from .process import DiffusionSpec, check_risk
from .quadrature import adaptive_simpson

__all__ = [
    "StationaryDensity",
    "CepVerdict",
    "stationary_wgn",
    "stationary_ballistic_marginal",
    "curvature_origin",
    "mode_count",
    "cep_classify",
]

_LOG_EPS = math.log(1e-16)
_TAIL_RATIO = 1e-12
_SCAN = tuple(2.0 ** k for k in range(-3, 21))


@dataclass(frozen=True)
class StationaryDensity:
    """``norm * u(x)`` on ``support``; ``u`` is scaled to peak near 1."""

    u: Callable
    norm: float
    support: tuple

    def __call__(self, x):
        return self.norm * self.u(x)

    def grid(self, n: int) -> np.ndarray:
        return np.linspace(self.support[0], self.support[1], n)


@dataclass(frozen=True)
class CepVerdict:
    holds: bool
    margin: float


def _log_cosh(y):
    y = np.abs(y)
    return y + np.log1p(np.exp(-2.0 * y)) - math.log(2.0)


def _require_potential(spec: DiffusionSpec) -> Callable:
    if spec.drift_antiderivative is None:
        raise InvalidParameter("stationary density needs the drift antiderivative B")
    if not spec.sigma > 0:
        raise InvalidParameter("stationary density needs sigma > 0")
    return spec.drift_antiderivative


def _tail_bound(log_u: Callable, ref: float, start: float, sign: float) -> float:
    """Point beyond ``start`` where ``log_u`` falls to ``ref + log(1e-16)``."""
    target = ref + _LOG_EPS
    if not float(log_u(sign * _SCAN[-1])) < target:
        raise NotNormalizable("density does not decay: drift is not globally attracting")
    prev = start
    for x in _SCAN:
        if x <= start:
            continue
        if float(log_u(sign * x)) < target:
            return sign * brentq(lambda s: float(log_u(sign * s)) - target, prev, x, xtol=1e-12)
        prev = x
    raise NotNormalizable("density does not decay: drift is not globally attracting")


def _normalize(log_u: Callable) -> StationaryDensity:
    scan = np.concatenate([-np.array(_SCAN[::-1]), [0.0], np.array(_SCAN)])
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.array([float(log_u(x)) for x in scan])
    finite = vals[np.isfinite(vals)]
    if finite.size == 0:
        raise NotNormalizable("log-density is not finite anywhere on the scan")
    if finite.size < vals.size:
        raise NotNormalizable("log-density overflows on the scan")
    top = int(np.argmax(vals))
    ref = float(vals[top])
    lo = _tail_bound(log_u, ref, max(0.0, -scan[top]), -1.0)
    hi = _tail_bound(log_u, ref, max(0.0, scan[top]), 1.0)

    def u(x):
        return np.exp(np.asarray(log_u(x), dtype=float) - ref)

    dense = u(np.linspace(lo, hi, 4097))
    peak = float(np.max(dense))
    if u(lo) > _TAIL_RATIO * peak or u(hi) > _TAIL_RATIO * peak:
        raise NotNormalizable("density is not negligible at the support bounds")
    mass = adaptive_simpson(lambda x: float(u(x)), lo, hi, tol=1e-13)
    if not (mass > 0 and math.isfinite(mass)):
        raise NotNormalizable("density has no finite positive mass")
    return StationaryDensity(u=u, norm=1.0 / mass, support=(lo, hi))


def stationary_wgn(spec: DiffusionSpec) -> StationaryDensity:
    """Stationary density ``N exp(2 B(x) / sigma**2)`` under white-noise forcing."""
    big = _require_potential(spec)
    s2 = spec.sigma ** 2
    return _normalize(lambda x: 2.0 * np.asarray(big(x), dtype=float) / s2)


def stationary_ballistic_marginal(
    spec: DiffusionSpec,
    lam: float,
    form: str = "cosh",
    bernoulli_scale: str = "unit",
) -> StationaryDensity:
    """Marginal stationary density under ballistic forcing.

    ``form="cosh"`` (default) is ``N cosh(sqrt(2 lam) x) exp(2 B / sigma**2)``.
    ``form="sum"`` is the two-branch form ``N [exp(2 B+ / s2) + exp(2 B- / s2)]``
    with ``B+-(x) = B(x) +- c x``, i.e. ``exp(2B/s2) cosh(2 c x / s2)``; the tilt
    ``c`` is ``sqrt(2 lam)`` for ``bernoulli_scale="unit"`` (Bernoulli drift
    added as is) or ``sigma sqrt(2 lam)`` for ``"sigma"`` (Bernoulli drift
    scaled by the noise amplitude).  Both branches must be attracting.
    """
    big = _require_potential(spec)
    lam = check_risk(lam)
    s2 = spec.sigma ** 2
    a = math.sqrt(2.0 * lam)
    if form == "cosh":
        def log_u(x):
            x = np.asarray(x, dtype=float)
            return 2.0 * np.asarray(big(x), dtype=float) / s2 + _log_cosh(a * x)
    elif form == "sum":
        if bernoulli_scale not in ("unit", "sigma"):
            raise InvalidParameter(f"unknown bernoulli_scale {bernoulli_scale!r}")
        c = a if bernoulli_scale == "unit" else spec.sigma * a

        def log_u(x):
            x = np.asarray(x, dtype=float)
            return 2.0 * np.asarray(big(x), dtype=float) / s2 + _log_cosh(2.0 * c * x / s2)
    else:
        raise InvalidParameter(f"unknown marginal form {form!r}")
    return _normalize(log_u)


def curvature_origin(spec: DiffusionSpec, lam: float) -> float:
    """Log-curvature of the ballistic marginal at 0: ``(2/sigma**2) b'(0) + 2 lam``."""
    if not spec.antisymmetric_drift:
        raise InvalidParameter("curvature at the origin needs an antisymmetric drift")
    if not spec.sigma > 0:
        raise InvalidParameter("curvature at the origin needs sigma > 0")
    lam = check_risk(lam)
    step = 1e-6
    slope = (float(spec.drift(step)) - float(spec.drift(-step))) / (2.0 * step)
    return 2.0 / spec.sigma ** 2 * slope + 2.0 * lam


def mode_count(d: StationaryDensity, grid_n: int = 4096) -> int:
    """Number of strict interior local maxima of ``u`` on a uniform grid.

    Runs of equal values are merged before comparing neighbours.
    """
    if grid_n < 256:
        raise InvalidParameter("mode_count needs grid_n >= 256")
    v = np.asarray(d.u(d.grid(grid_n)), dtype=float)
    keep = np.concatenate([[True], v[1:] != v[:-1]])
    v = v[keep]
    if v.size < 3:
        return 0
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    return int(np.count_nonzero(inner))


def cep_classify(b_drift: float, lam: float) -> CepVerdict:
    """Certainty equivalence holds iff the two-point drift law ``b +- sqrt(2 lam)``
    stays strictly on one side of zero.  Touching zero counts as violated.
    """
    lam = check_risk(lam)
    margin = abs(float(b_drift)) - math.sqrt(2.0 * lam)
    return CepVerdict(holds=margin > 0, margin=margin)
