"""Approximate Thompson sampling of optimum pairs (x*, f*).

Sample paths are weighted sums of random cosine features (Bochner spectral
sampling of the SE kernel); weights come from the exact Bayesian linear
model posterior, drawn by Matheron's rule against the n x n dual system
when n <= F and the F x F normal equations otherwise. Paths are maximized
on a scrambled low-discrepancy grid plus the training inputs, then polished
by batched coordinate line searches.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from . import gridopt, seeding
from ._backend import path_values
from .gp import GPPosterior, KernelParams

_DUPLICATE_TOL = 1e-9
_DUPLICATE_NUDGE = 1e-6


@dataclass(frozen=True)
class SamplerConfig:
    n_features: int = 1024
    grid_size: int | None = None  # default max(2000, 500*D)
    refine_iters: int = 5


@dataclass(frozen=True)
class RFFBasis:
    """Random cosine-feature expansion of the SE-ARD kernel.

    feature map: amplitude * cos(W x + b), with W rows drawn from the
    kernel's spectral density and amplitude^2 * F / 2 = output_scale, so
    the feature inner product estimates k.
    """

    weights_w: np.ndarray  # (F, D)
    phases_b: np.ndarray  # (F,)
    amplitude: float
    # float32 copies for grid-scale evaluation
    _wt32: np.ndarray = field(repr=False, default=None)
    _b32: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_wt32", np.ascontiguousarray(self.weights_w.T, dtype=np.float32))
        object.__setattr__(self, "_b32", np.ascontiguousarray(self.phases_b, dtype=np.float32))

    @property
    def n_features(self) -> int:
        return self.weights_w.shape[0]

    def features(self, x: np.ndarray) -> np.ndarray:
        """Feature matrix (B, F) in float64."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return self.amplitude * np.cos(x @ self.weights_w.T + self.phases_b)


@dataclass(frozen=True)
class SamplePath:
    """A posterior sample path: x -> theta . phi(x)."""

    basis: RFFBasis
    theta_weights: np.ndarray
    _theta32: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        scaled = self.basis.amplitude * self.theta_weights
        object.__setattr__(self, "_theta32", np.ascontiguousarray(scaled, dtype=np.float32))

    def values(self, x: np.ndarray) -> np.ndarray:
        """Exact float64 path values at a batch of points."""
        return self.basis.features(x) @ self.theta_weights

    def values_fast(self, x: np.ndarray) -> np.ndarray:
        """Float32 path values for dense grids (argmax seeding only)."""
        x32 = np.ascontiguousarray(x, dtype=np.float32)
        return path_values(self.basis._wt32, self.basis._b32, self._theta32, x32)


@dataclass(frozen=True)
class OptPair:
    """A sampled optimum location and its noiseless value."""

    x_star: np.ndarray
    f_star: float


def draw_rff_basis(params: KernelParams, n_features: int, seed) -> RFFBasis:
    """Spectral frequencies ~ N(0, diag(1/ls^2)), phases ~ U[0, 2pi)."""
    if n_features < 1:
        raise ValueError(f"n_features must be >= 1, got {n_features}")
    rng = _rng(seed)
    w = rng.standard_normal((n_features, params.dim)) / params.length_scales
    b = rng.uniform(0.0, 2.0 * math.pi, n_features)
    amplitude = math.sqrt(2.0 * params.output_scale / n_features)
    return RFFBasis(weights_w=w, phases_b=b, amplitude=amplitude)


def _rng(seed) -> np.random.Generator:
    entropy = seed if isinstance(seed, tuple) else (seed,)
    return seeding.rng_from(*entropy)


def draw_sample_path(basis: RFFBasis, data, noise_variance: float, seed) -> SamplePath:
    """Draw theta from the linear-model posterior given the observations.

    Prior theta ~ N(0, I); with data, Matheron's rule conditions a prior
    draw through the n x n dual system (or the F x F normal equations when
    n exceeds F). Per-observation noise defaults to ``noise_variance``.
    """
    data = tuple(data)
    rng = _rng(seed)
    f = basis.n_features
    theta0 = rng.standard_normal(f)
    n = len(data)
    if n == 0:
        return SamplePath(basis=basis, theta_weights=theta0)
    x = np.array([obs.x for obs in data], dtype=np.float64)
    y = np.array([obs.y for obs in data], dtype=np.float64)
    noise = np.array(
        [noise_variance if obs.noise_variance is None else obs.noise_variance for obs in data]
    )
    phi, phi32 = _features_mixed(basis, x, noise)
    eps = rng.standard_normal(n) * np.sqrt(noise)
    if n <= f:
        # feature Gram in float32 when the noise floor dwarfs its rounding
        m = (phi32 @ phi32.T).astype(np.float64) if phi32 is not None else phi @ phi.T
        resid = y - phi @ theta0 - eps
        theta = theta0 + phi.T @ _solve_jittered(m, noise, resid)
    else:
        a = phi.T @ (phi / noise[:, None])
        a[np.diag_indices_from(a)] += 1.0
        c, low = cho_factor(a, lower=True, check_finite=False)
        mean = cho_solve((c, low), phi.T @ (y / noise), check_finite=False)
        # cov = A^-1 = L^-T L^-1, so mean + L^-T xi is a posterior draw
        theta = mean + solve_triangular(c.T, rng.standard_normal(f), lower=False, check_finite=False)
    return SamplePath(basis=basis, theta_weights=theta)


def _features_mixed(basis: RFFBasis, x: np.ndarray, noise: np.ndarray):
    """Feature matrix, plus a float32 copy when noise dwarfs its rounding."""
    scale = basis.amplitude**2 * basis.n_features  # = 2 * output_scale
    if np.min(noise) >= 1e-4 * scale:
        z = np.asarray(x, dtype=np.float32) @ basis._wt32
        z += basis._b32
        np.cos(z, out=z)
        z *= np.float32(basis.amplitude)
        return z.astype(np.float64), z
    return basis.features(x), None


def _solve_jittered(m: np.ndarray, noise: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (M + diag(noise) + jitter I) u = rhs with escalating jitter."""
    scale = float(np.max(np.diag(m))) + float(np.max(noise)) if m.size else 1.0
    jit = 1e-10 * scale
    mat = m + np.diag(noise)
    while True:
        try:
            c, low = cho_factor(mat + jit * np.eye(m.shape[0]), lower=True, check_finite=False)
            return cho_solve((c, low), rhs, check_finite=False)
        except np.linalg.LinAlgError:
            jit *= 10.0
            if jit > 1e-4 * scale:
                raise


def maximize_path(
    path: SamplePath,
    bounds: np.ndarray,
    grid_size: int,
    refine_iters: int,
    seed,
    extra_candidates: np.ndarray | None = None,
    grid: np.ndarray | None = None,
) -> OptPair:
    """Grid-seeded maximization of one sample path.

    The dense grid scan and golden-section polish run in float32; the
    winner is re-scored in float64 against the best grid candidate, so the
    returned value dominates the best grid value.
    """
    if grid_size < 1:
        raise ValueError(f"grid_size must be >= 1, got {grid_size}")
    entropy = seed if isinstance(seed, tuple) else (seed,)
    cand = gridopt.sobol_points(grid_size, bounds, entropy) if grid is None else grid
    if extra_candidates is not None and len(extra_candidates):
        cand = np.vstack([cand, np.clip(extra_candidates, bounds[:, 0], bounds[:, 1])])
    fast = path.values_fast(cand)
    top = np.argsort(fast)[-8:]
    exact = path.values(cand[top])
    best = int(np.argmax(exact))
    x0, v0 = cand[top[best]], float(exact[best])
    x, _ = gridopt.refine_scan(path.values_fast, x0, v0, bounds, refine_iters)
    v = float(path.values(x[None, :])[0])
    if v < v0:
        x, v = x0, v0
    return OptPair(x_star=x, f_star=v)


def sample_opt_pairs(
    posterior: GPPosterior,
    bounds: np.ndarray,
    n_pairs: int,
    config: SamplerConfig,
    seed,
) -> list[OptPair]:
    """L independent opt-pairs, each from a fresh basis and path."""
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    entropy = seed if isinstance(seed, tuple) else (seed,)
    d = bounds.shape[0]
    grid_size = config.grid_size or max(2000, 500 * d)
    # one scrambled grid per batch of draws; path randomness comes from the
    # per-pair bases and weights
    grid = gridopt.sobol_points(grid_size, bounds, entropy + (0x67,))
    if posterior.n:
        grid = np.vstack([grid, posterior.x_train])
    pairs = []
    for ell in range(n_pairs):
        basis = draw_rff_basis(posterior.params, config.n_features, entropy + (ell, 0))
        path = draw_sample_path(basis, posterior.data, posterior.params.noise_variance, entropy + (ell, 1))
        pair = maximize_path(
            path, bounds, grid_size, config.refine_iters, entropy + (ell, 2), grid=grid,
        )
        pairs.append(_nudge_duplicate(pair, path, posterior, bounds))
    return pairs


def _nudge_duplicate(pair: OptPair, path: SamplePath, posterior: GPPosterior, bounds) -> OptPair:
    """Perturb an x* that collides with a training input (singular rank-1)."""
    if posterior.n == 0:
        return pair
    close = np.max(np.abs(posterior.x_train - pair.x_star), axis=1) < _DUPLICATE_TOL
    if not np.any(close):
        return pair
    span = bounds[:, 1] - bounds[:, 0]
    shift = _DUPLICATE_NUDGE * span
    x = pair.x_star + shift
    over = x > bounds[:, 1]
    x[over] = pair.x_star[over] - shift[over]
    x = np.clip(x, bounds[:, 0], bounds[:, 1])
    return OptPair(x_star=x, f_star=float(path.values(x[None, :])[0]))
