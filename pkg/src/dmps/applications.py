"""Closed forms for two applications of ballistic noise.

Investment: the marginal value ``q`` of installed capital when productivity
``p_t`` follows a geometric diffusion, with and without a ballistic drift
component of amplitude ``mu``.

Pricing: Black-Scholes dynamics driven by the ballistic process, whose
terminal law is an equal-weight pair of log-normals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentIntegral, InvalidParameter
from .process import check_risk
from .specialfn import norm_cdf

__all__ = [
    "InvestParams",
    "BSParams",
    "MomentConvention",
    "cobb_douglas_h",
    "q0",
    "q_mu",
    "q_ballistic",
    "q_ballistic_smallmu",
    "expected_power_moment",
    "bs_marginal_density",
    "bs_marginal_cdf",
    "bs_mean",
    "bs_branch_medians",
    "growth_ratio",
]


def cobb_douglas_h(alpha: float, omega: float) -> float:
    """Profit scale ``(1 - a) a^(a/(1-a)) w^(-a/(1-a))`` of the Cobb-Douglas technology."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter("alpha must lie in (0, 1)")
    if not omega > 0:
        raise InvalidParameter("h diverges at omega = 0; supply h directly")
    e = alpha / (1.0 - alpha)
    return (1.0 - alpha) * alpha ** e * omega ** (-e)


@dataclass(frozen=True)
class InvestParams:
    """Parameters of the investment problem.

    ``h`` is derived from ``alpha`` and ``omega`` unless given explicitly,
    which is required when ``omega == 0``.
    """

    r: float
    delta: float
    alpha: float
    omega: float
    theta: float
    sigma: float
    mu: float
    p_t: float
    h: float | None = None

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidParameter("r must be positive")
        if self.delta < 0 or self.sigma < 0 or self.mu < 0 or self.omega < 0:
            raise InvalidParameter("delta, sigma, mu and omega must be non-negative")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameter("alpha must lie in (0, 1)")
        if not self.p_t > 0:
            raise InvalidParameter("p_t must be positive")
        if self.h is None:
            object.__setattr__(self, "h", cobb_douglas_h(self.alpha, self.omega))
        if not (math.isfinite(self.h) and self.h > 0):
            raise InvalidParameter("h must be finite and positive")

    @property
    def discount(self) -> float:
        """Effective discount ``A = r + delta - theta (theta - 1) sigma^2 / 2``."""
        return self.r + self.delta - 0.5 * self.theta * (self.theta - 1.0) * self.sigma ** 2

    @property
    def scale(self) -> float:
        """Current profit flow ``h p_t^theta``."""
        return self.h * self.p_t ** self.theta


def _present_value(scale: float, rate: float) -> float:
    if not rate > 0:
        raise DivergentIntegral(f"present-value integral diverges: effective discount {rate:g} <= 0")
    return scale / rate


def q0(p: InvestParams) -> float:
    """Marginal value of capital without drift noise: ``h p_t^theta / A``."""
    return _present_value(p.scale, p.discount)


def q_mu(p: InvestParams, drift_sign: int) -> float:
    """Branch value under a constant drift ``drift_sign * mu``: ``h p_t^theta / (A - drift_sign mu)``."""
    if drift_sign not in (1, -1):
        raise InvalidParameter("drift_sign must be +1 or -1")
    return _present_value(p.scale, p.discount - drift_sign * p.mu)


def q_ballistic(p: InvestParams) -> float:
    """Average of the two drift branches, equal to ``h p_t^theta A / (A^2 - mu^2)``."""
    a = p.discount
    if not a - p.mu > 0:
        raise DivergentIntegral(f"ballistic branch diverges: A - mu = {a - p.mu:g} <= 0")
    return 0.5 * (q_mu(p, 1) + q_mu(p, -1))


def q_ballistic_smallmu(p: InvestParams) -> float:
    """Second-order expansion ``q0 (1 + (mu / A)^2)``."""
    base = q0(p)
    return base * (1.0 + (p.mu / p.discount) ** 2)


def expected_power_moment(p_t: float, theta: float, sigma: float, s: float) -> float:
    """``E[p_s^theta] = p_t^theta exp(theta (theta - 1) sigma^2 s / 2)`` for driftless log-normal ``p``."""
    if s < 0:
        raise InvalidParameter("s must be non-negative")
    return p_t ** theta * math.exp(0.5 * theta * (theta - 1.0) * sigma ** 2 * s)


class MomentConvention(str, enum.Enum):
    PAPER = "paper"
    HALF_VARIANCE = "half-variance"


@dataclass(frozen=True)
class BSParams:
    x0: float
    mu: float
    sigma: float
    lam: float
    moment_convention: MomentConvention = MomentConvention.PAPER

    def __post_init__(self):
        if not self.x0 > 0:
            raise InvalidParameter("x0 must be positive")
        if not self.sigma > 0:
            raise InvalidParameter("sigma must be positive")
        check_risk(self.lam)
        object.__setattr__(self, "moment_convention", MomentConvention(self.moment_convention))

    @property
    def tilt(self) -> float:
        return self.sigma * math.sqrt(2.0 * self.lam)


def bs_marginal_density(x, t: float, p: BSParams):
    """Equal-weight mixture of log-normals with log-means ``ln x0 + (mu +- sigma sqrt(2 lam)) t``
    and log-variance ``sigma^2 t``.
    """
    x = np.asarray(x, dtype=float)
    if not t > 0:
        raise InvalidParameter("t must be positive")
    if np.any(x <= 0):
        raise InvalidParameter("x must be positive")
    v = p.sigma ** 2 * t
    lx = np.log(x)
    base = math.log(p.x0) + p.mu * t
    out = 0.0
    for sgn in (-1.0, 1.0):
        m = base + sgn * p.tilt * t
        out = out + 0.5 * np.exp(-((lx - m) ** 2) / (2.0 * v)) / (x * math.sqrt(2.0 * math.pi * v))
    return out


def bs_marginal_cdf(x, t: float, p: BSParams):
    """CDF of :func:`bs_marginal_density`; zero for ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    if not t > 0:
        raise InvalidParameter("t must be positive")
    sd = p.sigma * math.sqrt(t)
    with np.errstate(divide="ignore"):
        lx = np.log(np.where(x > 0, x, 1.0))
    base = math.log(p.x0) + p.mu * t
    out = 0.5 * norm_cdf((lx - base + p.tilt * t) / sd) + 0.5 * norm_cdf((lx - base - p.tilt * t) / sd)
    return np.where(x > 0, out, 0.0)


def bs_mean(t: float, p: BSParams) -> float:
    """First moment ``x0 exp(k t) cosh(sigma sqrt(2 lam) t)``.

    ``k = mu + sigma^2`` for the ``paper`` convention and ``mu + sigma^2 / 2``
    for ``half-variance``.
    """
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    var_coef = 1.0 if p.moment_convention is MomentConvention.PAPER else 0.5
    return p.x0 * math.exp((p.mu + var_coef * p.sigma ** 2) * t) * math.cosh(p.tilt * t)


def bs_branch_medians(t: float, p: BSParams) -> tuple[float, float]:
    """Medians ``x0 exp((mu -+ sigma sqrt(2 lam)) t)`` of the lower and upper branches.

    The lower one decays in ``t`` whenever ``mu < sigma sqrt(2 lam)``: that
    branch drifts towards bankruptcy.
    """
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    return p.x0 * math.exp((p.mu - p.tilt) * t), p.x0 * math.exp((p.mu + p.tilt) * t)


def growth_ratio(t: float, sigma: float, lam: float) -> float:
    """Mean enhancement ``cosh(sigma sqrt(2 lam) t)`` over the ``lam = 0`` dynamics."""
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    lam = check_risk(lam)
    return math.cosh(sigma * math.sqrt(2.0 * lam) * t)
