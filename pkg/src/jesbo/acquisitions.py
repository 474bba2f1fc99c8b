"""Acquisition functions: expected improvement, max-value entropy search,
and joint entropy search over a conditioned-GP ensemble.

JES precomputes L rank-1-extended posteriors, one per sampled opt-pair;
because each member shares the base Cholesky factor plus one extra row,
batched evaluation needs a single base triangular solve and one matrix
product across members. The value is the predictive entropy minus the
average moment-matched entropy after conditioning and local truncation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from . import gridopt
from ._backend import avg_trunc_entropy, se_cross
from .gp import GPPosterior, Observation, rank_one_extend
from .optima import OptPair

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_2PI_E = math.log(2.0 * math.pi) + 1.0
_MES_GAMMA_FLOOR = 1e-8
_EI_SD_FLOOR = 1e-12


def _entropy_arr(var):
    return 0.5 * (_LOG_2PI_E + np.log(np.maximum(var, 1e-300)))


def ei_batch(means: np.ndarray, f_vars: np.ndarray, incumbent: float) -> np.ndarray:
    """Closed-form expected improvement over the incumbent (maximization)."""
    sd = np.sqrt(np.maximum(f_vars, 0.0))
    diff = means - incumbent
    degenerate = sd < _EI_SD_FLOOR
    z = np.where(degenerate, 0.0, diff / np.where(degenerate, 1.0, sd))
    pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
    val = diff * ndtr(z) + sd * pdf
    return np.where(degenerate, np.maximum(diff, 0.0), val)


def expected_improvement(posterior: GPPosterior, x: np.ndarray, incumbent: float) -> float:
    mean, var_f, _ = posterior.predict(x)
    return float(ei_batch(np.array([mean]), np.array([var_f]), incumbent)[0])


def mes_batch(posterior: GPPosterior, x: np.ndarray, f_star_samples: np.ndarray) -> np.ndarray:
    """Average entropy reduction from upper-bounding f by each sampled max.

    gamma = (f* - m)/s is floored at a small positive value; a sampled max
    below the posterior mean would otherwise hit the log cdf singularity.
    """
    f_star_samples = np.asarray(f_star_samples, dtype=np.float64)
    if f_star_samples.size < 1:
        raise ValueError("need at least one f* sample")
    means, f_vars = posterior.predict_batch(x)
    sd = np.sqrt(np.maximum(f_vars, 1e-300))
    gamma = np.maximum((f_star_samples[:, None] - means) / sd, _MES_GAMMA_FLOOR)
    pdf = np.exp(-0.5 * gamma * gamma) / _SQRT_2PI
    cdf = ndtr(gamma)
    terms = gamma * pdf / (2.0 * cdf) - log_ndtr(gamma)
    return terms.mean(axis=0)


def mes(posterior: GPPosterior, x: np.ndarray, f_star_samples) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(mes_batch(posterior, x, np.asarray(f_star_samples))[0])


@dataclass(frozen=True)
class ConditionedEnsemble:
    """L posteriors, each the base GP extended by one noiseless opt-pair.

    The incremental quantities (new Cholesky row, pivot and z entry of each
    member) are read straight from the extended factors and drive the
    batched evaluation.
    """

    base_posterior: GPPosterior
    members: tuple  # of (OptPair, GPPosterior)
    noise_variance: float
    x_stars: np.ndarray  # (L, D)
    f_stars: np.ndarray  # (L,)
    l_rows: np.ndarray  # (L, n) last Cholesky row of each member
    d_pivots: np.ndarray  # (L,)
    z_new: np.ndarray  # (L,)

    @property
    def n_members(self) -> int:
        return len(self.members)


def build_conditioned_ensemble(posterior: GPPosterior, pairs) -> ConditionedEnsemble:
    """Rank-1 extend the posterior by each opt-pair with jitter noise."""
    pairs = tuple(pairs)
    if not pairs:
        raise ValueError("need at least one opt-pair")
    jitter = posterior.params.jitter
    members = []
    n = posterior.n
    l_rows = np.empty((len(pairs), n))
    d_pivots = np.empty(len(pairs))
    z_new = np.empty(len(pairs))
    for i, pair in enumerate(pairs):
        ext = rank_one_extend(posterior, Observation(pair.x_star, pair.f_star, jitter))
        members.append((pair, ext))
        l_rows[i] = ext.chol_factor[n, :n]
        d_pivots[i] = ext.chol_factor[n, n]
        z_new[i] = ext.z_vector[n]
    return ConditionedEnsemble(
        base_posterior=posterior,
        members=tuple(members),
        noise_variance=posterior.params.noise_variance,
        x_stars=np.array([p.x_star for p in pairs], dtype=np.float64),
        f_stars=np.array([p.f_star for p in pairs], dtype=np.float64),
        l_rows=l_rows,
        d_pivots=d_pivots,
        z_new=z_new,
    )


def _member_moments(ensemble: ConditionedEnsemble, x: np.ndarray):
    """Base and per-member posterior f-moments at a batch of points.

    Member predictions follow from the shared base solve: with
    v_new = (k(x, x*) - l . v_base)/d, the member mean is
    m_base + v_new * z_new and the member variance is s_base - v_new^2.
    """
    base = ensemble.base_posterior
    params = base.params
    x = np.asarray(x, dtype=np.float64)
    inv_ls2 = np.ascontiguousarray(1.0 / params.length_scales**2)
    k_star = se_cross(ensemble.x_stars, np.ascontiguousarray(x), inv_ls2, params.output_scale)
    if base.n == 0:
        m_base = np.zeros(x.shape[0])
        s_base = np.full(x.shape[0], params.output_scale)
        v_new = k_star / ensemble.d_pivots[:, None]
    else:
        v_base = base._base_solve(x)
        m_base = v_base.T @ base.z_vector
        s_base = np.maximum(params.output_scale - np.einsum("ij,ij->j", v_base, v_base), 0.0)
        v_new = (k_star - ensemble.l_rows @ v_base) / ensemble.d_pivots[:, None]
    m_mem = m_base[None, :] + v_new * ensemble.z_new[:, None]
    s_mem = np.maximum(s_base[None, :] - v_new * v_new, 0.0)
    return m_base, s_base, m_mem, s_mem


def jes_batch(ensemble: ConditionedEnsemble, x: np.ndarray) -> np.ndarray:
    """Joint entropy search values at a batch of points."""
    _, s_base, m_mem, s_mem = _member_moments(ensemble, x)
    noise = ensemble.noise_variance
    first = _entropy_arr(s_base + noise)
    second = avg_trunc_entropy(
        np.ascontiguousarray(m_mem), np.ascontiguousarray(s_mem), ensemble.f_stars, noise
    )
    return first - second


def jes(ensemble: ConditionedEnsemble, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(jes_batch(ensemble, x)[0])


def jes_decomposition(ensemble: ConditionedEnsemble, x: np.ndarray) -> tuple[float, float]:
    """(conditioning drop, truncation drop); their sum is the JES value."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    _, s_base, m_mem, s_mem = _member_moments(ensemble, x)
    noise = ensemble.noise_variance
    first = _entropy_arr(s_base + noise)[0]
    member_ent = _entropy_arr(s_mem + noise).mean(axis=0)[0]
    second = avg_trunc_entropy(
        np.ascontiguousarray(m_mem), np.ascontiguousarray(s_mem), ensemble.f_stars, noise
    )[0]
    return float(first - member_ent), float(member_ent - second)


def optimize_acquisition(acq_batch, bounds: np.ndarray, grid_size: int, refine_iters: int, seed) -> np.ndarray:
    """Argmax of a batch-evaluable acquisition over the box."""
    if grid_size < 1:
        raise ValueError(f"grid_size must be >= 1, got {grid_size}")
    entropy = seed if isinstance(seed, tuple) else (seed,)
    x, _ = gridopt.maximize(acq_batch, bounds, grid_size, refine_iters, entropy)
    return x
