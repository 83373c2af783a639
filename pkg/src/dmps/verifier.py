"""Numerical checks of the dynamic mean-preserving spread conditions.

For a risk-indexed family of transition densities ``Q_lam(x, t)`` with CDF
``P_lam(x, t)`` the two integral conditions are

    (i)  d/dlam  int_R P_lam(x, t) dx            = 0
    (ii) d/dlam  int_{-inf}^x P_lam(y, t) dy     >= 0   for every x.

``int_R P dx`` diverges on its own, so (i) is evaluated through the
integrable difference quotient ``[P_{lam+h} - P_{lam-h}] / 2h`` and
cross-checked against the exact identity ``int (P_1 - P_2) dx = m_2 - m_1``.

Two independent routes are available for the ballistic family:

* the CDF route differentiates the closed-form mixture CDF in ``lam``;
* the eigenfunction route integrates ``dQ/dlam`` built from
  ``R = dh/dlam`` and the base density, twice in ``x``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameter
from .process import EigenFamily, EigenKind, ballistic_family, bernoulli_mixture, check_risk
from .quadrature import adaptive_simpson, cumulative_simpson
from .specialfn import norm_cdf

__all__ = [
    "VerifyGrid",
    "default_grid",
    "hermite_grid",
    "DmpsReport",
    "Tolerances",
    "cdf_P",
    "first_integral_condition",
    "first_condition_mean_check",
    "second_integral_condition",
    "phi_profile",
    "phi_profile_eigen",
    "check_proposition1",
    "verify_ballistic",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class VerifyGrid:
    """Evaluation grid for the verifier.

    ``lambda_step`` is the central-difference step in ``lam``; ``None`` picks
    ``min(1e-4, lam / 10)`` at the risk level in use.
    """

    x_lo: float
    x_hi: float
    n_x: int = 2048
    lambda_step: Optional[float] = None
    quad_tol: float = 1e-10
    tail_guard: Optional[float] = None

    def __post_init__(self):
        if not (self.x_lo < 0.0 < self.x_hi):
            raise InvalidParameter(f"grid must straddle 0, got [{self.x_lo}, {self.x_hi}]")
        if self.n_x < 64 or self.n_x % 2:
            raise InvalidParameter(f"n_x must be even and >= 64, got {self.n_x}")
        if self.lambda_step is not None and not self.lambda_step > 0:
            raise InvalidParameter("lambda_step must be positive")
        if not self.quad_tol > 0:
            raise InvalidParameter("quad_tol must be positive")
        if self.tail_guard is not None and not self.tail_guard >= 0:
            raise InvalidParameter("tail_guard must be non-negative")

    def points(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n_x)

    @property
    def guard(self) -> float:
        """Width of the band beyond each end that stands in for the infinite tails.

        Defaults to half the grid width.
        """
        if self.tail_guard is not None:
            return self.tail_guard
        return 0.5 * (self.x_hi - self.x_lo)

    def step_for(self, lam: float) -> float:
        h = self.lambda_step if self.lambda_step is not None else min(1e-4, lam / 10.0)
        if not (0.0 < h <= lam / 2.0):
            raise InvalidParameter(f"lambda_step {h} must lie in (0, lam/2] for lam={lam}")
        return h


def default_grid(lam_max: float, t: float, n_x: int = 2048) -> VerifyGrid:
    """Symmetric grid covering ``|x| <= sqrt(2 lam_max) t + 10 sqrt(t)``."""
    half = math.sqrt(2.0 * check_risk(lam_max)) * t + 10.0 * math.sqrt(t)
    return VerifyGrid(-half, half, n_x)


def hermite_grid(t: float, n_x: int = 2048) -> VerifyGrid:
    """Twelve base standard deviations either side of 0 for the Hermite base process,
    with a three-deviation guard band.
    """
    sd = math.sqrt(math.expm1(2.0 * t))
    return VerifyGrid(-12.0 * sd, 12.0 * sd, n_x, tail_guard=3.0 * sd)


@dataclass(frozen=True)
class DmpsReport:
    """Outcome of one verification at ``(lam, t)``.

    ``curvature_min`` is the minimum of ``R(x) q(0,0|x,t)``, the positivity
    hypothesis of the sufficiency argument.  ``phi_route_gap`` compares the
    CDF route and the eigenfunction route (ballistic family only).
    """

    family: str
    lam: float
    t: float
    first_condition_residual: float
    first_condition_mean_check: Optional[float]
    second_condition_min: float
    phi_end_residual: float
    psi_antisymmetry_residual: float
    curvature_min: float
    r_symmetry_residual: float
    r_min: float
    phi_route_gap: Optional[float]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Tolerances:
    first_condition: float = 1e-6
    second_condition_floor: float = -1e-8
    phi_end: float = 1e-6
    psi_antisymmetry: float = 1e-8
    curvature_floor: float = -1e-10
    r_symmetry: float = 1e-8
    r_floor: float = -1e-10

    def check(self, report: DmpsReport) -> dict:
        """Per-check booleans; ``all(...)`` of the values is the verdict."""
        out = {
            "first_condition": abs(report.first_condition_residual) < self.first_condition,
            "second_condition": report.second_condition_min >= self.second_condition_floor,
            "phi_end": report.phi_end_residual < self.phi_end,
            "psi_antisymmetry": report.psi_antisymmetry_residual < self.psi_antisymmetry,
            "curvature": report.curvature_min >= self.curvature_floor,
            "r_symmetry": report.r_symmetry_residual < self.r_symmetry,
            "r_positive": report.r_min >= self.r_floor,
        }
        if report.first_condition_mean_check is not None:
            out["mean_check"] = abs(report.first_condition_mean_check) < 1e-8
        return out


# ---------------------------------------------------------------------------
# CDF route (ballistic family, closed-form mixture CDF)


def cdf_P(lam: float, t: float, x, grid: Optional[VerifyGrid] = None):
    """``P_lam(x, t)``: CDF of the ballistic law at time ``t`` from the origin.

    ``grid`` is accepted for interface symmetry and unused: the mixture CDF is
    closed form.
    """
    lam = check_risk(lam)
    if not t > 0:
        raise InvalidParameter(f"t must be > 0, got {t}")
    s = math.sqrt(2.0 * lam) * t
    rt = math.sqrt(t)
    x = np.asarray(x, dtype=float)
    out = 0.5 * norm_cdf((x + s) / rt) + 0.5 * norm_cdf((x - s) / rt)
    return float(out) if np.ndim(out) == 0 else out


def _cdf_difference_quotient(lam: float, t: float, h: float):
    """Scalar ``x -> [P_{lam+h}(x) - P_{lam-h}(x)] / 2h``.

    Right of the origin the difference is formed from survival functions so
    that nothing is subtracted from numbers close to one.
    """
    rt = math.sqrt(t)
    s_up = math.sqrt(2.0 * (lam + h)) * t
    s_dn = math.sqrt(2.0 * (lam - h)) * t
    k = 1.0 / (_SQRT2 * rt)
    erfc = math.erfc
    inv = 1.0 / (2.0 * h)

    def dq(x: float) -> float:
        if x <= 0.0:
            up = erfc(-(x + s_up) * k) + erfc(-(x - s_up) * k)
            dn = erfc(-(x + s_dn) * k) + erfc(-(x - s_dn) * k)
            return 0.25 * (up - dn) * inv
        up = erfc((x + s_up) * k) + erfc((x - s_up) * k)
        dn = erfc((x + s_dn) * k) + erfc((x - s_dn) * k)
        return 0.25 * (dn - up) * inv

    return dq


def first_integral_condition(lam: float, t: float, grid: VerifyGrid) -> float:
    """Residual of condition (i): ``int dP/dlam dx`` over the grid plus both guard bands."""
    lam = check_risk(lam, positive=True)
    h = grid.step_for(lam)
    dq = _cdf_difference_quotient(lam, float(t), h)
    return adaptive_simpson(dq, grid.x_lo - grid.guard, grid.x_hi + grid.guard, tol=grid.quad_tol)


def _mixture_mean(lam: float, t: float, grid: VerifyGrid) -> float:
    pdf = bernoulli_mixture(lam, t).pdf
    return adaptive_simpson(lambda x: x * pdf(x), grid.x_lo - grid.guard, grid.x_hi + grid.guard, tol=grid.quad_tol)


def first_condition_mean_check(lam: float, t: float, grid: VerifyGrid) -> float:
    """``(m_{lam-h} - m_{lam+h}) / 2h`` from quadrature of the two densities' means."""
    lam = check_risk(lam, positive=True)
    h = grid.step_for(lam)
    return (_mixture_mean(lam - h, t, grid) - _mixture_mean(lam + h, t, grid)) / (2.0 * h)


def second_integral_condition(lam: float, t: float, x: float, grid: VerifyGrid) -> float:
    """``Phi_lam(x) = d/dlam int_{-inf}^x P_lam(y, t) dy``; ``x`` is clipped to the grid.

    The lower limit is the left end of the guard band.
    """
    lam = check_risk(lam, positive=True)
    h = grid.step_for(lam)
    x = min(max(float(x), grid.x_lo), grid.x_hi)
    dq = _cdf_difference_quotient(lam, float(t), h)
    return adaptive_simpson(dq, grid.x_lo - grid.guard, x, tol=grid.quad_tol)


def phi_profile(lam: float, t: float, grid: VerifyGrid) -> tuple[np.ndarray, np.ndarray]:
    """``Phi_lam`` on every grid point via the CDF route."""
    lam = check_risk(lam, positive=True)
    h = grid.step_for(lam)
    xs = grid.points()
    dq = _cdf_difference_quotient(lam, float(t), h)
    tail = adaptive_simpson(dq, grid.x_lo - grid.guard, grid.x_lo, tol=grid.quad_tol)
    return xs, tail + cumulative_simpson(dq, xs, tol=grid.quad_tol)


# ---------------------------------------------------------------------------
# Eigenfunction route


def _dq_dlam(fam: EigenFamily, t: float):
    """``x -> dQ_lam/dlam`` with ``Q_lam = exp(-lam t) h(x)/h(0) q(x)``.

    The normalizer contributes ``-(t + R(0)/h(0))`` times ``Q_lam``.
    """
    h0 = fam.h(0.0)
    c = t + fam.R(0.0) / h0
    var = fam.base_variance(t)
    norm = math.exp(-fam.lam * t) / (h0 * math.sqrt(2.0 * math.pi * var))

    def integrand(x: float) -> np.ndarray:
        q = norm * math.exp(-x * x / (2.0 * var))
        r = (fam.R(x) - c * fam.h(x)) * q
        return np.array([r, x * r])

    return integrand


def phi_profile_eigen(fam: EigenFamily, t: float, grid: VerifyGrid):
    """``(xs, Psi, Phi)`` from ``R = dh/dlam`` and the base density.

    ``Psi(x) = int_{-inf}^x dQ/dlam`` and
    ``Phi(x) = int_{-inf}^x Psi = x Psi(x) - int_{-inf}^x y dQ/dlam(y) dy``
    by parts; the left tail is the guard band below ``x_lo``.
    """
    xs = grid.points()
    f = _dq_dlam(fam, float(t))
    tail = adaptive_simpson(f, grid.x_lo - grid.guard, grid.x_lo, tol=grid.quad_tol)
    acc = tail + cumulative_simpson(f, xs, tol=grid.quad_tol)
    psi = acc[:, 0]
    phi = xs * psi - acc[:, 1]
    return xs, psi, phi


def check_proposition1(fam: EigenFamily, t: float, grid: Optional[VerifyGrid] = None) -> DmpsReport:
    """Verify the sufficiency hypotheses and both integral conditions.

    For the ballistic family the integral conditions are taken from the CDF
    route and ``phi_route_gap`` records the distance to the eigenfunction
    route; the Hermite family uses the eigenfunction route alone.
    """
    t = float(t)
    if grid is None:
        grid = default_grid(fam.lam, t) if fam.kind is EigenKind.BALLISTIC_COSH else hermite_grid(t)
    xs = grid.points()

    r_pos = np.asarray(fam.R(xs), dtype=float)
    r_neg = np.asarray(fam.R(-xs), dtype=float)
    r_sym = float(np.max(np.abs(r_pos - r_neg)))
    r_min = float(np.min(r_pos))
    curvature_min = float(np.min(r_pos * fam.base_tpd(xs, t)))

    _, psi, phi_eig = phi_profile_eigen(fam, t, grid)
    psi_res = float(np.max(np.abs(psi + psi[::-1])))

    if fam.kind is EigenKind.BALLISTIC_COSH:
        lam = check_risk(fam.lam, positive=True)
        _, phi = phi_profile(lam, t, grid)
        first = first_integral_condition(lam, t, grid)
        mean_check = first_condition_mean_check(lam, t, grid)
        gap = float(np.max(np.abs(phi - phi_eig)))
    else:
        phi = phi_eig
        first = float(phi[-1])
        mean_check = None
        gap = None

    return DmpsReport(
        family=fam.kind.value,
        lam=fam.lam,
        t=t,
        first_condition_residual=float(first),
        first_condition_mean_check=mean_check,
        second_condition_min=float(np.min(phi)),
        phi_end_residual=float(max(abs(phi[0]), abs(phi[-1]))),
        psi_antisymmetry_residual=psi_res,
        curvature_min=curvature_min,
        r_symmetry_residual=r_sym,
        r_min=r_min,
        phi_route_gap=gap,
    )


def verify_ballistic(lam: float, t: float, grid: Optional[VerifyGrid] = None) -> DmpsReport:
    """Shorthand for ``check_proposition1(ballistic_family(lam), t, grid)``."""
    return check_proposition1(ballistic_family(check_risk(lam, positive=True)), t, grid)
