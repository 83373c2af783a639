"""Scalar special functions: Kummer's 1F1, digamma and the Gaussian kernel.

Only real arguments are supported.  The confluent hypergeometric series is
summed term by term with Neumaier compensation; its derivative with respect
to the first parameter is produced by the same recurrence so that the
Hermite eigenfunctions and their risk derivatives share one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InvalidParameter, NonConvergence

__all__ = [
    "SeriesControl",
    "DEFAULT_SERIES",
    "hyp1f1",
    "hyp1f1_and_da",
    "digamma",
    "gauss_pdf",
    "norm_cdf",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation controls for power series.

    A series stops once the current term is below
    ``abs_tol * max(1, |partial sum|)`` (or ``rel_tol * |partial sum|``)
    and the terms have started to shrink.
    """

    max_terms: int = 500
    abs_tol: float = 1e-15
    rel_tol: float = 0.0

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise InvalidParameter(f"max_terms must be a positive integer, got {self.max_terms!r}")
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidParameter(f"{name} must be finite and >= 0, got {v!r}")

    def small(self, term: float, total: float) -> bool:
        return abs(term) <= max(self.abs_tol * max(1.0, abs(total)), self.rel_tol * abs(total))


DEFAULT_SERIES = SeriesControl()


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _check_kummer_args(b: float, z: float) -> None:
    if _is_nonpositive_int(b):
        raise InvalidParameter(f"1F1 undefined for b = {b} (non-positive integer)")
    if not math.isfinite(z):
        raise InvalidParameter(f"1F1 argument must be finite, got z = {z}")


def _kummer_series(a: float, b: float, z: float, ctrl: SeriesControl) -> float:
    total, comp = 1.0, 0.0
    term = 1.0
    for n in range(ctrl.max_terms):
        ratio = (a + n) * z / ((b + n) * (n + 1))
        term *= ratio
        y = total + term
        # Neumaier compensation
        if abs(total) >= abs(term):
            comp += (total - y) + term
        else:
            comp += (term - y) + total
        total = y
        if term == 0.0:
            return total + comp
        if ctrl.small(term, total) and abs((a + n + 1) * z / ((b + n + 1) * (n + 2))) < 1.0:
            return total + comp
    raise NonConvergence(
        f"1F1({a}, {b}; {z}) did not converge in {ctrl.max_terms} terms"
    )


def hyp1f1(a: float, b: float, z: float, ctrl: SeriesControl = DEFAULT_SERIES) -> float:
    """Kummer's confluent hypergeometric function 1F1(a; b; z).

    Negative arguments go through Kummer's transformation
    ``1F1(a, b, z) = exp(z) 1F1(b - a, b, -z)`` so that the summed series has
    terms of one sign whenever ``b - a >= 0``.

    Raises:
        InvalidParameter: ``b`` is zero or a negative integer, or ``z`` is not finite.
        NonConvergence: ``ctrl.max_terms`` were used without meeting the tolerance.
    """
    a, b, z = float(a), float(b), float(z)
    _check_kummer_args(b, z)
    if z == 0.0 or a == 0.0:
        return 1.0
    if z < 0.0 and not _is_nonpositive_int(a):
        return math.exp(z) * _kummer_series(b - a, b, -z, ctrl)
    return _kummer_series(a, b, z, ctrl)


def hyp1f1_and_da(
    a: float, b: float, z: float, ctrl: SeriesControl = DEFAULT_SERIES
) -> tuple[float, float]:
    """Return ``(1F1(a, b, z), d/da 1F1(a, b, z))`` for ``z >= 0``.

    The derivative of the n-th term is ``term_n * sum_{k<n} 1/(a + k)``, built
    through the product rule so that non-positive integer ``a`` is harmless.
    """
    a, b, z = float(a), float(b), float(z)
    _check_kummer_args(b, z)
    if z < 0.0:
        raise InvalidParameter("hyp1f1_and_da needs z >= 0")
    if z == 0.0:
        return 1.0, 0.0
    total, dtotal = 1.0, 0.0
    term, dterm = 1.0, 0.0
    for n in range(ctrl.max_terms):
        c = z / ((b + n) * (n + 1))
        dterm = dterm * (a + n) * c + term * c
        term = term * (a + n) * c
        total += term
        dtotal += dterm
        shrinking = abs((a + n + 1) * z / ((b + n + 1) * (n + 2))) < 1.0
        if shrinking and ctrl.small(term, total) and ctrl.small(dterm, dtotal):
            return total, dtotal
    raise NonConvergence(
        f"d/da 1F1({a}, {b}; {z}) did not converge in {ctrl.max_terms} terms"
    )


# Bernoulli-number coefficients B_2k / (2k) of the digamma asymptotic expansion.
_PSI_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(z: float) -> float:
    """Digamma function for real ``z > 0``.

    Shifts upward with ``psi(z) = psi(z + 1) - 1/z`` until ``z >= 8`` and then
    uses the asymptotic expansion in ``1/z**2``.
    """
    z = float(z)
    if not z > 0.0 or not math.isfinite(z):
        raise InvalidParameter(f"digamma implemented for finite z > 0, got {z}")
    shift = 0.0
    while z < 8.0:
        shift -= 1.0 / z
        z += 1.0
    inv2 = 1.0 / (z * z)
    series = 0.0
    for coef in reversed(_PSI_ASYMPTOTIC):
        series = series * inv2 + coef
    return shift + math.log(z) - 0.5 / z - series * inv2


def gauss_pdf(x, mean=0.0, var=1.0):
    """Normal density with the given mean and variance; vectorizes over ``x``."""
    if np.any(np.asarray(var) <= 0):
        raise InvalidParameter(f"variance must be positive, got {var!r}")
    x = np.asarray(x, dtype=float)
    out = np.exp(-((x - mean) ** 2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
    return float(out) if out.ndim == 0 else out


def norm_cdf(x):
    """Standard normal CDF (thin wrapper so call sites read uniformly)."""
    out = ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out
