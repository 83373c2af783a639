"""Seeded simulation: Euler-Maruyama, the exact ballistic sampler, and fit statistics.

Paths are processed in fixed-size blocks.  A block's noise comes from the
counter-based generator in :mod:`dmps.rng`, and the block layout does not
depend on the worker count, so any number of workers gives bit-identical
output.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import rng
from .errors import InvalidParameter, NumericalBlowup
from .process import DiffusionSpec, ballistic_drift, check_risk
from .quadrature import adaptive_simpson

__all__ = [
    "SimConfig",
    "SampleSet",
    "Histogram",
    "euler_maruyama",
    "exact_ballistic_sample",
    "ballistic_sde_sample",
    "simulate_coupled",
    "ks_distance",
    "l1_distance",
    "histogram_mode_count",
    "BLOWUP_LIMIT",
    "BLOCK_PATHS",
]

BLOWUP_LIMIT = 1e12
BLOCK_PATHS = 4096
_STEP_CHUNK = 64

PROVENANCE_EXACT = "exact-mixture"
PROVENANCE_SDE = "integrated-sde"


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Attributes:
        dt: step size.
        horizon: terminal time; must be an integer multiple of ``dt`` up to 1e-9 relative.
        n_paths: number of independent paths.
        seed: unsigned 64-bit seed.
        scheme: integration scheme; only ``"euler-maruyama"`` is supported.
    """

    dt: float
    horizon: float
    n_paths: int
    seed: int
    scheme: str = "euler-maruyama"

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidParameter(f"dt must be positive, got {self.dt}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise InvalidParameter(f"horizon must be positive, got {self.horizon}")
        if self.dt > self.horizon * (1.0 + 1e-12):
            raise InvalidParameter("dt must not exceed the horizon")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise InvalidParameter(f"n_paths must be a positive integer, got {self.n_paths}")
        if int(self.seed) != self.seed or not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParameter("seed must be an unsigned 64-bit integer")
        if self.scheme != "euler-maruyama":
            raise InvalidParameter(f"unsupported scheme {self.scheme!r}")
        n = round(self.horizon / self.dt)
        if abs(n * self.dt - self.horizon) > 1e-9 * self.horizon:
            raise InvalidParameter("horizon must be an integer multiple of dt")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class SampleSet:
    values: np.ndarray
    config: SimConfig
    provenance: str

    def __post_init__(self):
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.values.size

    def mean(self) -> float:
        return float(np.mean(self.values))

    def var(self) -> float:
        return float(np.var(self.values, ddof=1))

    def mean_se(self) -> float:
        return math.sqrt(self.var() / len(self))

    def var_se(self) -> float:
        """Standard error of the sample variance from the fourth central moment."""
        d = self.values - self.mean()
        m4 = float(np.mean(d ** 4))
        v = self.var()
        return math.sqrt(max(m4 - v * v, 0.0) / len(self))


@dataclass(frozen=True)
class Histogram:
    """Normalized histogram of terminal states."""

    edges: np.ndarray
    density: np.ndarray
    samples: SampleSet = field(repr=False)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def probabilities(self) -> np.ndarray:
        return self.density * np.diff(self.edges)


def _run_blocks(fn: Callable[[int, int], np.ndarray], n_paths: int, workers: int) -> np.ndarray:
    if workers < 1:
        raise InvalidParameter("workers must be >= 1")
    starts = list(range(0, n_paths, BLOCK_PATHS))
    sizes = [min(BLOCK_PATHS, n_paths - s) for s in starts]
    if workers == 1 or len(starts) == 1:
        parts = [fn(s, n) for s, n in zip(starts, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, starts, sizes))
    return np.concatenate(parts)


def _integrate_block(drift, sigma, x0, dt, n_steps, seed, path0, n, offset=None):
    x = np.full(n, float(x0))
    sq = sigma * math.sqrt(dt)
    noise = np.empty((_STEP_CHUNK, n))
    for k0 in range(0, n_steps, _STEP_CHUNK):
        m = min(_STEP_CHUNK, n_steps - k0)
        if sq != 0.0:
            rng.fill_normals(seed, rng.STREAM_DIFFUSION, path0, k0, noise[:m])
        for k in range(m):
            b = np.asarray(drift(x), dtype=float)
            if offset is not None:
                b = b + offset
            x = x + b * dt
            if sq != 0.0:
                x += sq * noise[k]
        bad = ~(np.abs(x) <= BLOWUP_LIMIT)
        if bad.any():
            i = int(np.argmax(bad))
            raise NumericalBlowup(
                f"|X| exceeded {BLOWUP_LIMIT:g} on path {path0 + i} by step {k0 + m}",
                path=path0 + i,
                step=k0 + m,
            )
    return x


def euler_maruyama(
    spec: DiffusionSpec,
    drift_override: Callable | None,
    x0: float,
    cfg: SimConfig,
    workers: int = 1,
) -> SampleSet:
    """Terminal states of ``X_{k+1} = X_k + b(X_k) dt + sigma sqrt(dt) xi_k``.

    Args:
        spec: diffusion; its drift is used unless ``drift_override`` is given.
        drift_override: optional vectorized replacement drift.
        x0: common initial state.
        cfg: step size, horizon, path count and seed.
        workers: threads used over path blocks; does not affect the result.

    Raises:
        NumericalBlowup: some path left ``[-1e12, 1e12]`` or became NaN.
    """
    drift = drift_override if drift_override is not None else spec.drift

    def block(path0, n):
        return _integrate_block(drift, spec.sigma, x0, cfg.dt, cfg.n_steps, cfg.seed, path0, n)

    values = _run_blocks(block, cfg.n_paths, workers)
    return SampleSet(values=values, config=cfg, provenance=PROVENANCE_SDE)


def _signs(seed: int, path0: int, n: int) -> np.ndarray:
    return np.where(rng.path_uniforms(seed, rng.STREAM_SIGN, path0, n) < 0.5, -1.0, 1.0)


def exact_ballistic_sample(lam: float, t: float, n: int, seed: int, workers: int = 1) -> SampleSet:
    """Exact draws from the ballistic law: ``s sqrt(2 lam) t + sqrt(t) xi`` with a fair sign ``s``."""
    lam = check_risk(lam)
    if not (t > 0 and math.isfinite(t)):
        raise InvalidParameter(f"t must be positive, got {t}")
    cfg = SimConfig(dt=t, horizon=t, n_paths=n, seed=seed)
    shift = math.sqrt(2.0 * lam) * t
    root_t = math.sqrt(t)

    def block(path0, m):
        xi = rng.path_normals(seed, rng.STREAM_EXACT, path0, m)
        return _signs(seed, path0, m) * shift + root_t * xi

    values = _run_blocks(block, n, workers)
    return SampleSet(values=values, config=cfg, provenance=PROVENANCE_EXACT)


def ballistic_sde_sample(lam: float, cfg: SimConfig, workers: int = 1) -> SampleSet:
    """Euler-Maruyama paths of the tanh-drift ballistic SDE started at 0."""
    lam = check_risk(lam)
    spec = DiffusionSpec(drift=lambda x: ballistic_drift(x, lam), sigma=1.0, antisymmetric_drift=True)
    return euler_maruyama(spec, None, 0.0, cfg, workers)


def simulate_coupled(
    spec: DiffusionSpec,
    lam: float,
    cfg: SimConfig,
    bins: int = 80,
    x0: float = 0.0,
    bernoulli_scale: str = "sigma",
    workers: int = 1,
) -> Histogram:
    """Terminal histogram of ``dX = [b(X) + c B] dt + sigma dW`` with a per-path fair sign ``B = +-sqrt(2 lam)``.

    ``c`` is ``sigma`` for ``bernoulli_scale="sigma"`` and 1 for ``"unit"``.
    The histogram spans the sample range and integrates to 1.
    """
    lam = check_risk(lam)
    if bernoulli_scale not in ("sigma", "unit"):
        raise InvalidParameter(f"unknown bernoulli_scale {bernoulli_scale!r}")
    if bins < 2:
        raise InvalidParameter("bins must be >= 2")
    scale = spec.sigma if bernoulli_scale == "sigma" else 1.0
    tilt = scale * math.sqrt(2.0 * lam)

    def block(path0, n):
        offset = tilt * _signs(cfg.seed, path0, n)
        return _integrate_block(spec.drift, spec.sigma, x0, cfg.dt, cfg.n_steps, cfg.seed, path0, n, offset)

    values = _run_blocks(block, cfg.n_paths, workers)
    samples = SampleSet(values=values, config=cfg, provenance=PROVENANCE_SDE)
    density, edges = np.histogram(values, bins=bins, density=True)
    return Histogram(edges=edges, density=density, samples=samples)


def ks_distance(samples, cdf: Callable) -> float:
    """Kolmogorov-Smirnov statistic ``sup |F_n - F|`` over the sorted sample."""
    x = np.sort(np.asarray(getattr(samples, "values", samples), dtype=float))
    n = x.size
    if n == 0:
        raise InvalidParameter("ks_distance needs a non-empty sample")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def l1_distance(hist: Histogram, density: Callable, support: tuple | None = None) -> float:
    """L1 distance between histogram bin masses and a closed-form density.

    Bin masses of the density are integrated exactly per bin; any density mass
    outside the histogram range (within ``support`` if given) is added in full.
    """
    edges = hist.edges
    ref = np.array(
        [adaptive_simpson(lambda x: float(density(x)), float(a), float(b), tol=1e-10) for a, b in zip(edges[:-1], edges[1:])]
    )
    gap = abs(hist.probabilities() - ref).sum()
    if support is not None:
        outside = 0.0
        if support[0] < edges[0]:
            outside += adaptive_simpson(lambda x: float(density(x)), support[0], float(edges[0]), tol=1e-10)
        if support[1] > edges[-1]:
            outside += adaptive_simpson(lambda x: float(density(x)), float(edges[-1]), support[1], tol=1e-10)
        gap += outside
    return float(gap)


def histogram_mode_count(hist: Histogram, rel_prominence: float = 0.05) -> int:
    """Count peaks of a lightly smoothed histogram whose prominence exceeds ``rel_prominence * max``.

    A binomial (1, 4, 6, 4, 1) kernel suppresses bin-level noise first.
    """
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
    smooth = np.convolve(np.pad(hist.density, 2), kernel, mode="same")[2:-2]
    peaks, _ = find_peaks(np.pad(smooth, 1), prominence=rel_prominence * float(smooth.max()))
    return int(peaks.size)
