"""Monte Carlo sampling of the winding angle.

Paths are advanced in the skew-product picture: with ``R = e^W`` the
log-radius ``W`` is a standard Brownian motion run on the clock
``u = int_0^s dr / R_r^2``, and given that clock the winding angle at time
``t`` is exactly ``N(0, u_t)``.  So only the clock is discretized; each step
adds ``du`` of clock and the matching real time ``int e^{2W} du`` (conditional
mean over a Brownian bridge).  The step rule ``du = min(kappa, h_max/R^2)``
is the same as taking real time steps ``h = min(h_max, kappa R^2)``.

Randomness comes from a counter-based hash of ``(master_seed, path_index,
step)``, so every path is reproducible on its own and batches do not
depend on chunking or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, InvalidBins, InvalidRange, StepBudgetExceeded

MAX_STEPS = 10**9
_ANGLE_COUNTER = np.uint64(1 << 62)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_TWO53 = 2.0 ** -53


@dataclass(frozen=True)
class SimConfig:
    t: float
    rho: float = 1.0
    n_paths: int = 10_000
    h_max: float | None = None
    kappa: float = 0.01
    master_seed: int = 0
    max_steps: int = MAX_STEPS
    # below the level where the two step rules meet, clock steps grow with
    # depth so that one step moves W by at most 1/deep_factor of the depth
    deep_factor: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "rho", float(self.rho))
        if not (self.t > 0 and math.isfinite(self.t)):
            raise DomainError(f"t must be positive and finite, got {self.t!r}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise DomainError(f"rho must be positive and finite, got {self.rho!r}")
        if self.n_paths < 1:
            raise DomainError("n_paths must be >= 1")
        if self.h_max is None:
            object.__setattr__(self, "h_max", self.t / 1000.0)
        if not 0 < self.h_max <= self.t:
            raise DomainError(f"need 0 < h_max <= t, got {self.h_max!r}")
        if not 0 < self.kappa <= 1:
            raise DomainError(f"kappa must lie in (0, 1], got {self.kappa!r}")
        if self.max_steps < 1:
            raise DomainError("max_steps must be >= 1")
        if not self.deep_factor >= 1:
            raise DomainError("deep_factor must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class WindingSample:
    theta_t: float
    n_steps: int
    min_radius: float


class WindingBatch(Sequence[WindingSample]):
    """Column storage for many samples; indexes like a list of :class:`WindingSample`."""

    def __init__(self, theta_t: np.ndarray, n_steps: np.ndarray, min_radius: np.ndarray):
        self.theta_t = theta_t
        self.n_steps = n_steps
        self.min_radius = min_radius

    def __len__(self):
        return len(self.theta_t)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return WindingBatch(self.theta_t[i], self.n_steps[i], self.min_radius[i])
        return WindingSample(float(self.theta_t[i]), int(self.n_steps[i]), float(self.min_radius[i]))

    def __eq__(self, other):
        if not isinstance(other, WindingBatch):
            return NotImplemented
        return (np.array_equal(self.theta_t, other.theta_t) and np.array_equal(self.n_steps, other.n_steps)
                and np.array_equal(self.min_radius, other.min_radius))


@dataclass(frozen=True)
class HistogramEstimate:
    bin_edges: np.ndarray
    densities: np.ndarray
    std_errors: np.ndarray
    n_samples: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)


# ---------------------------------------------------------------------------
# counter-based generator


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, in place on a uint64 array."""
    z ^= z >> _S30
    z *= _M1
    z ^= z >> _S27
    z *= _M2
    z ^= z >> _S31
    return z


def path_keys(master_seed: int, path_index: np.ndarray) -> np.ndarray:
    """Per-path 64-bit keys; a pure function of ``(master_seed, path_index)``."""
    with np.errstate(over="ignore"):
        z = (np.asarray(path_index, dtype=np.uint64) + np.uint64(1)) * _GOLDEN
        z = _mix64(z)
        z ^= np.uint64(master_seed)
        return _mix64(z)


def counter_normals(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Standard normals indexed by ``(key, counter)``."""
    with np.errstate(over="ignore"):
        z = keys + (counters.astype(np.uint64) + np.uint64(1)) * _GOLDEN
        z = _mix64(z)
    u = ((z >> _S11).astype(np.float64) + 0.5) * _TWO53
    return ndtri(u)


# ---------------------------------------------------------------------------
# simulation kernel


def _log_expm1_ratio(x: np.ndarray) -> np.ndarray:
    """``log(expm1(x)/x)`` without overflow; 0 at ``x = 0``."""
    out = 0.5 * x
    big = np.abs(x) > 1e-8
    xb = x[big]
    pos = xb > 0
    val = np.empty_like(xb)
    val[pos] = xb[pos] + np.log1p(-np.exp(-xb[pos])) - np.log(xb[pos])
    val[~pos] = np.log1p(-np.exp(xb[~pos])) - np.log(-xb[~pos])
    out[big] = val
    return out


def _run_paths(cfg: SimConfig, index: np.ndarray) -> WindingBatch:
    n = len(index)
    keys = path_keys(cfg.master_seed, index)
    log_ratio = math.log(cfg.h_max / cfg.kappa)
    w_ref = 0.5 * log_ratio
    w_deep = w_ref - cfg.deep_factor * math.sqrt(cfg.kappa)

    clock = np.zeros(n)
    steps = np.zeros(n, dtype=np.int64)
    w_min = np.full(n, math.log(cfg.rho))

    # state of the still-running paths
    act = np.arange(n)
    w = np.full(n, math.log(cfg.rho))
    time = np.zeros(n)
    h = np.zeros(n)
    k = np.zeros(n, dtype=np.int64)

    while len(act):
        z = counter_normals(keys[act], k)
        du = cfg.kappa * np.exp(np.minimum(0.0, log_ratio - 2.0 * w))
        deep = w < w_deep
        any_deep = deep.any()
        if any_deep:
            du[deep] = np.maximum(cfg.kappa, ((w_ref - w[deep]) / cfg.deep_factor) ** 2)
        dw = np.sqrt(du) * z
        two_dw = 2.0 * dw
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            growth = np.expm1(two_dw)
            ratio = np.divide(growth, two_dw, out=np.ones_like(growth), where=two_dw != 0.0)
            dt = np.exp(2.0 * w) * du * ratio * (1.0 + du / 3.0)
            if any_deep:
                ud = du[deep]
                log_dt = 2.0 * w[deep] + np.log(ud) + _log_expm1_ratio(two_dw[deep]) + np.log1p(ud / 3.0)
                dt[deep] = np.exp(np.minimum(log_dt, 700.0))
        remaining = cfg.t - time
        last = dt >= remaining
        k += 1
        if last.any():
            frac = remaining[last] / dt[last]
            idx = act[last]
            clock[idx] = h[last] + frac * du[last]
            steps[idx] = k[last]
            keep = ~last
            act, w, time, h, k = act[keep], w[keep], time[keep], h[keep], k[keep]
            du, dt, dw = du[keep], dt[keep], dw[keep]
        h += du
        time += dt
        w += dw
        w_min[act] = np.minimum(w_min[act], w)
        if len(act) and k.max() >= cfg.max_steps:
            bad = int(index[act[k >= cfg.max_steps].min()])
            raise StepBudgetExceeded(f"path {bad} exceeded {cfg.max_steps} steps", path_index=bad)

    z = counter_normals(keys, np.full(n, _ANGLE_COUNTER, dtype=np.uint64))
    return WindingBatch(np.sqrt(clock) * z, steps, np.exp(w_min))


def simulate_winding(cfg: SimConfig, path_index: int) -> WindingSample:
    if not 0 <= path_index < cfg.n_paths:
        raise DomainError(f"path_index must lie in [0, {cfg.n_paths}), got {path_index!r}")
    return _run_paths(cfg, np.array([path_index]))[0]


def sample_batch(cfg: SimConfig, threads: int = 1, chunk_size: int = 1 << 15) -> WindingBatch:
    """All ``cfg.n_paths`` samples in path order.

    The result is identical for every ``threads`` and ``chunk_size``.  On a
    step-budget failure the error names the smallest failing path index
    within the first failing chunk.
    """
    if threads < 1 or chunk_size < 1:
        raise DomainError("threads and chunk_size must be >= 1")
    starts = range(0, cfg.n_paths, chunk_size)
    chunks = [np.arange(s, min(s + chunk_size, cfg.n_paths)) for s in starts]
    if threads == 1:
        parts = [_run_paths(cfg, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _run_paths(cfg, c), chunks))
    return WindingBatch(np.concatenate([p.theta_t for p in parts]),
                        np.concatenate([p.n_steps for p in parts]),
                        np.concatenate([p.min_radius for p in parts]))


# ---------------------------------------------------------------------------
# estimators


def _angles(samples) -> np.ndarray:
    if isinstance(samples, WindingBatch):
        return samples.theta_t
    arr = np.asarray([s.theta_t if isinstance(s, WindingSample) else s for s in samples], dtype=float)
    return arr


def histogram_density(samples: WindingBatch | Iterable, bin_edges) -> HistogramEstimate:
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or not np.all(np.isfinite(edges)) or np.any(np.diff(edges) <= 0):
        raise InvalidBins("need at least two finite, strictly increasing bin edges")
    theta = _angles(samples)
    n = len(theta)
    if n == 0:
        raise DomainError("no samples")
    counts, _ = np.histogram(theta, bins=edges)
    width = np.diff(edges)
    p = counts / n
    return HistogramEstimate(edges, p / width, np.sqrt(p * (1.0 - p) / n) / width, n)


def estimate_interval_prob(samples: WindingBatch | Iterable, alpha: float, beta: float) -> tuple[float, float]:
    """Fraction of samples in ``(alpha, beta)`` and its binomial standard error."""
    if not alpha < beta:
        raise InvalidRange(f"need alpha < beta, got {alpha!r}, {beta!r}")
    theta = _angles(samples)
    n = len(theta)
    if n == 0:
        raise DomainError("no samples")
    p = float(np.count_nonzero((theta > alpha) & (theta < beta))) / n
    return p, math.sqrt(p * (1.0 - p) / n)
