"""Exact Gaussian-process regression with a squared-exponential ARD kernel.

Posteriors keep a Cholesky factor of the noisy Gram matrix and support
O(n^2) rank-1 extension by a single observation, which is what makes
fantasized-observation acquisition functions affordable. Hyperparameters
are fitted by MAP-II (multi-restart Nelder-Mead in log space) or supplied
verbatim for benchmark tasks where they are known.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from ._backend import se_cross
from . import seeding

JITTER_REL = 1e-10  # relative to output_scale, added to every Gram diagonal
JITTER_MAX_REL = 1e-4
LOG_2PI = math.log(2.0 * math.pi)

# diagnostic counter: number of negative predicted variances clamped to 0
_clamp_events = 0


def clamp_event_count() -> int:
    return _clamp_events


def reset_clamp_events() -> None:
    global _clamp_events
    _clamp_events = 0


class ConditioningError(ValueError):
    """Gram matrix stayed non-positive-definite after jitter escalation."""


@dataclass(frozen=True)
class KernelParams:
    """SE-ARD hyperparameters: per-dimension length scales, output scale
    (prior variance) and observation noise variance."""

    length_scales: np.ndarray
    output_scale: float
    noise_variance: float

    def __post_init__(self):
        object.__setattr__(self, "length_scales", np.asarray(self.length_scales, dtype=np.float64))
        if self.length_scales.ndim != 1 or not np.all(self.length_scales > 0):
            raise ValueError(f"length_scales must be a positive vector, got {self.length_scales}")
        if not self.output_scale > 0:
            raise ValueError(f"output_scale must be positive, got {self.output_scale}")
        if self.noise_variance < 0:
            raise ValueError(f"noise_variance must be non-negative, got {self.noise_variance}")

    @property
    def dim(self) -> int:
        return self.length_scales.shape[0]

    @property
    def jitter(self) -> float:
        return JITTER_REL * self.output_scale


@dataclass(frozen=True)
class Observation:
    """A single (x, y) pair; ``noise_variance=None`` means the model's.

    Fantasized noiseless observations carry an explicit tiny noise (the
    jitter) instead of 0 to keep the extended Gram matrix invertible.
    """

    x: np.ndarray
    y: float
    noise_variance: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64).reshape(-1))


def kernel_eval(params: KernelParams, x: np.ndarray, x2: np.ndarray) -> float:
    """k(x, x2) = output_scale * exp(-0.5 * sum(((x-x2)/ls)^2))."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    x2 = np.asarray(x2, dtype=np.float64).reshape(-1)
    if x.shape[0] != params.dim or x2.shape[0] != params.dim:
        raise ValueError(f"dimension mismatch: {x.shape[0]}, {x2.shape[0]} vs kernel dim {params.dim}")
    q = np.sum(((x - x2) / params.length_scales) ** 2)
    return params.output_scale * math.exp(-0.5 * q)


def _cross_cov(params: KernelParams, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    inv_ls2 = 1.0 / params.length_scales**2
    return se_cross(
        np.ascontiguousarray(x1, dtype=np.float64),
        np.ascontiguousarray(x2, dtype=np.float64),
        np.ascontiguousarray(inv_ls2),
        params.output_scale,
    )


@dataclass(frozen=True)
class GPPosterior:
    """GP posterior over f given data, with cached Cholesky solves.

    chol_factor is the lower triangular factor of K_n + diag(noise);
    z_vector = L^-1 y and alpha_vector = (K_n + diag(noise))^-1 y.
    """

    params: KernelParams
    data: tuple
    x_train: np.ndarray
    y_train: np.ndarray
    noise_diag: np.ndarray
    chol_factor: np.ndarray
    z_vector: np.ndarray
    alpha_vector: np.ndarray

    @property
    def n(self) -> int:
        return self.x_train.shape[0]

    def predict(self, x: np.ndarray) -> tuple[float, float, float]:
        """Posterior (mean, f-variance, y-variance) at a single point."""
        m, vf = self.predict_batch(np.asarray(x, dtype=np.float64).reshape(1, -1))
        return float(m[0]), float(vf[0]), float(vf[0] + self.params.noise_variance)

    def predict_batch(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and f-variance at a batch of points (B, D)."""
        global _clamp_events
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.params.dim:
            raise ValueError(f"expected (B, {self.params.dim}) inputs, got {x.shape}")
        s2 = self.params.output_scale
        if self.n == 0:
            return np.zeros(x.shape[0]), np.full(x.shape[0], s2)
        v = self._base_solve(x)
        mean = v.T @ self.z_vector
        var = s2 - np.einsum("ij,ij->j", v, v)
        neg = var < 0.0
        if np.any(neg):
            _clamp_events += int(np.count_nonzero(neg))
            var = np.where(neg, 0.0, var)
        return mean, np.minimum(var, s2)

    def _base_solve(self, x: np.ndarray) -> np.ndarray:
        """L^-1 K(X_train, x) for a batch, shape (n, B)."""
        k = _cross_cov(self.params, self.x_train, x)
        return solve_triangular(self.chol_factor, k, lower=True, check_finite=False)


def _chol_with_jitter(k: np.ndarray, noise: np.ndarray, params: KernelParams):
    """Cholesky of K + diag(noise) + jitter*I, escalating jitter on failure."""
    jit = params.jitter
    while True:
        try:
            l = np.linalg.cholesky(k + np.diag(noise + jit))
            return l, jit
        except np.linalg.LinAlgError:
            jit *= 10.0
            if jit > JITTER_MAX_REL * params.output_scale:
                raise ConditioningError(
                    f"Gram matrix of size {k.shape[0]} not positive definite even with "
                    f"jitter {JITTER_MAX_REL * params.output_scale:g}"
                ) from None


def fit_posterior(data, params: KernelParams) -> GPPosterior:
    """Exact posterior from observations; O(n^3) factorization."""
    data = tuple(data)
    for obs in data:
        if obs.x.shape[0] != params.dim:
            raise ValueError(f"observation dim {obs.x.shape[0]} != kernel dim {params.dim}")
    n = len(data)
    x = np.array([obs.x for obs in data], dtype=np.float64).reshape(n, params.dim)
    y = np.array([obs.y for obs in data], dtype=np.float64)
    noise = np.array(
        [params.noise_variance if obs.noise_variance is None else obs.noise_variance for obs in data],
        dtype=np.float64,
    )
    if n == 0:
        e = np.empty
        return GPPosterior(params, data, x, y, noise, e((0, 0)), e(0), e(0))
    k = _cross_cov(params, x, x)
    l, jit = _chol_with_jitter(k, noise, params)
    z = solve_triangular(l, y, lower=True, check_finite=False)
    alpha = solve_triangular(l.T, z, lower=False, check_finite=False)
    return GPPosterior(params, data, x, y, noise + jit, l, z, alpha)


def rank_one_extend(posterior: GPPosterior, obs: Observation) -> GPPosterior:
    """Posterior over data + one observation in O(n^2).

    Appends one row to the triangular factor instead of re-factorizing;
    predictions match a full refit to rounding error.
    """
    p = posterior
    if obs.x.shape[0] != p.params.dim:
        raise ValueError(f"observation dim {obs.x.shape[0]} != kernel dim {p.params.dim}")
    noise_new = p.params.noise_variance if obs.noise_variance is None else obs.noise_variance
    n = p.n
    c = p.params.output_scale + noise_new
    if n == 0:
        l_row = np.empty(0)
        d2 = c
    else:
        b = _cross_cov(p.params, p.x_train, obs.x[None, :])[:, 0]
        l_row = solve_triangular(p.chol_factor, b, lower=True, check_finite=False)
        d2 = c - l_row @ l_row
    # jitter the new pivot only when the extension degenerates; fantasized
    # observations already carry a jitter-sized noise of their own
    jit = 0.0
    if d2 <= 0.0:
        jit = p.params.jitter
        while d2 + jit <= 0.0:
            jit *= 10.0
            if jit > JITTER_MAX_REL * p.params.output_scale:
                raise ConditioningError(
                    f"rank-1 extension at {obs.x} leaves the Gram matrix non-positive-definite"
                )
    d = math.sqrt(d2 + jit)
    chol = np.zeros((n + 1, n + 1))
    chol[:n, :n] = p.chol_factor
    chol[n, :n] = l_row
    chol[n, n] = d
    z = np.append(p.z_vector, (obs.y - l_row @ p.z_vector) / d)
    alpha = solve_triangular(chol.T, z, lower=False, check_finite=False)
    return GPPosterior(
        params=p.params,
        data=p.data + (obs,),
        x_train=np.vstack([p.x_train, obs.x[None, :]]),
        y_train=np.append(p.y_train, obs.y),
        noise_diag=np.append(p.noise_diag, noise_new + jit),
        chol_factor=chol,
        z_vector=z,
        alpha_vector=alpha,
    )


def log_marginal_likelihood(data, params: KernelParams) -> float:
    """log p(y | X, params) for the zero-mean GP; empty data gives 0."""
    data = tuple(data)
    if not data:
        return 0.0
    post = fit_posterior(data, params)
    n = post.n
    log_det = 2.0 * float(np.sum(np.log(np.diag(post.chol_factor))))
    return float(-0.5 * post.z_vector @ post.z_vector - 0.5 * log_det - 0.5 * n * LOG_2PI)


@dataclass(frozen=True)
class HyperFitConfig:
    """How to produce kernel hyperparameter sets.

    mode "fixed" returns ``fixed_params`` verbatim (benchmarks with known
    generating parameters); "map" runs multi-restart MAP-II; "ensemble"
    returns the MAP set plus perturbed-MAP sets started from prior samples.
    """

    mode: str = "map"
    fixed_params: KernelParams | None = None
    n_sets: int = 1
    n_restarts: int = 5
    max_iter: int = 200
    ls_prior_median_factor: float = 0.3
    prior_log_sd: float = 1.0
    noise_prior_log_sd: float = 2.0


def _prior_medians(data, bounds: np.ndarray, cfg: HyperFitConfig) -> np.ndarray:
    span = bounds[:, 1] - bounds[:, 0]
    y = np.array([obs.y for obs in data])
    var_y = float(np.var(y)) if len(y) > 1 else 1.0
    if var_y <= 0.0:
        var_y = 1.0
    return np.concatenate(
        [np.log(cfg.ls_prior_median_factor * span), [math.log(var_y), math.log(0.01 * var_y)]]
    )


def _unpack(log_p: np.ndarray, dim: int) -> KernelParams:
    return KernelParams(
        length_scales=np.exp(log_p[:dim]),
        output_scale=float(np.exp(log_p[dim])),
        noise_variance=float(np.exp(log_p[dim + 1])),
    )


def fit_hyperparameters(data, bounds: np.ndarray, config: HyperFitConfig, seed: int) -> list[KernelParams]:
    """Hyperparameter set(s) for marginalization; see HyperFitConfig."""
    if config.mode == "fixed":
        if config.fixed_params is None:
            raise ValueError("fixed mode requires fixed_params")
        return [config.fixed_params]
    data = tuple(data)
    if len(data) < 2:
        raise ValueError(f"hyperparameter fitting needs >= 2 observations, got {len(data)}")
    dim = bounds.shape[0]
    medians = _prior_medians(data, bounds, config)
    log_sd = np.full(dim + 2, config.prior_log_sd)
    log_sd[-1] = config.noise_prior_log_sd

    def neg_map(log_p: np.ndarray) -> float:
        if np.any(log_p[:dim] < -12) or np.any(np.abs(log_p) > 25):
            return 1e12
        try:
            lml = log_marginal_likelihood(data, _unpack(log_p, dim))
        except (ConditioningError, FloatingPointError):
            return 1e12
        log_prior = -0.5 * float(np.sum(((log_p - medians) / log_sd) ** 2))
        val = -(lml + log_prior)
        return val if math.isfinite(val) else 1e12

    def optimize_from(x0: np.ndarray) -> tuple[float, np.ndarray]:
        res = minimize(neg_map, x0, method="Nelder-Mead", options={"maxiter": config.max_iter, "xatol": 1e-3, "fatol": 1e-4})
        return float(res.fun), res.x

    rng = seeding.rng_from(seed, seeding.HYPERS)

    def map_estimate(n_restarts: int, restart_rng) -> np.ndarray:
        starts = [medians] + [
            medians + log_sd * restart_rng.standard_normal(dim + 2) for _ in range(n_restarts - 1)
        ]
        best_val, best_x = math.inf, None
        for x0 in starts:
            val, x = optimize_from(x0)
            if val < best_val:
                best_val, best_x = val, x
        if best_x is None or not math.isfinite(best_val) or best_val >= 1e12:
            warnings.warn("hyperparameter optimization diverged; falling back to prior medians")
            return medians
        return best_x

    map_x = map_estimate(config.n_restarts, rng)
    sets = [_unpack(map_x, dim)]
    if config.mode == "ensemble":
        for _ in range(config.n_sets - 1):
            start = medians + log_sd * rng.standard_normal(dim + 2)
            val, x = optimize_from(start)
            sets.append(_unpack(x if math.isfinite(val) and val < 1e12 else map_x, dim))
    return sets
