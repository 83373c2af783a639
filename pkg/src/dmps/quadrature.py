"""Adaptive Simpson quadrature.

Used by every closed-form check in the package: normalization and moments
of transition densities, cumulative integrals behind the mean-preserving
spread conditions, and stationary-density normalization.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from .errors import QuadratureFailure

__all__ = ["adaptive_simpson", "cumulative_simpson"]


def _size(v) -> float:
    if isinstance(v, float):
        return abs(v)
    return float(np.max(np.abs(v)))


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self, k: int) -> None:
        self.left -= k
        if self.left < 0:
            raise QuadratureFailure("adaptive Simpson exceeded its evaluation budget")


def _refine(f, a, fa, m, fm, b, fb, whole, tol, depth, budget):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    budget.spend(2)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or _size(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return _refine(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, budget) + _refine(
        f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, budget
    )


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 40,
    max_evals: int = 2_000_000,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Args:
        f: scalar integrand.
        a, b: limits; ``b < a`` gives the negated integral.
        tol: absolute error target for the whole interval.
        max_depth: bisection depth at which a panel is accepted as is.
        max_evals: integrand-evaluation budget.

    Raises:
        QuadratureFailure: the evaluation budget ran out.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth, max_evals)
    budget = _Budget(max_evals)
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    budget.spend(3)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _refine(f, a, fa, m, fm, b, fb, whole, tol, max_depth, budget)


def cumulative_simpson(
    f: Callable[[float], float],
    grid: Sequence[float],
    tol: float = 1e-10,
    max_depth: int = 40,
    max_evals: int = 5_000_000,
) -> np.ndarray:
    """Running integral ``int_{grid[0]}^{grid[i]} f`` at every grid point.

    Each panel between consecutive grid points is integrated adaptively to
    ``tol``; panel results are accumulated left to right.  ``f`` may return a
    1-d array, in which case the result has shape ``(len(grid), k)``.
    """
    xs = np.asarray(grid, dtype=float)
    budget = _Budget(max_evals)
    fvals = [f(float(x)) for x in xs]
    budget.spend(len(fvals))
    shape = np.shape(fvals[0]) if fvals else ()
    out = np.zeros(xs.shape + shape)
    if xs.size < 2:
        return out
    acc = 0.0
    for i in range(1, xs.size):
        a, b = float(xs[i - 1]), float(xs[i])
        m = 0.5 * (a + b)
        fm = f(m)
        budget.spend(1)
        whole = (b - a) / 6.0 * (fvals[i - 1] + 4.0 * fm + fvals[i])
        acc += _refine(f, a, fvals[i - 1], m, fm, b, fvals[i], whole, tol, max_depth, budget)
        out[i] = acc
    return out
