"""Grid-plus-refinement maximization of cheap black-box functions.

Used for sample-path maximization, acquisition optimization, posterior-mean
recommendation and the true-optimum oracle: evaluate a scrambled Sobol grid
(plus caller-supplied candidates), then polish the single best point with
coordinate-wise golden-section line searches.
"""

import math

import numpy as np
from scipy.stats import qmc

from . import seeding

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def sobol_points(n: int, bounds: np.ndarray, seed_entropy: tuple) -> np.ndarray:
    """n scrambled Sobol points in the box ``bounds`` (D, 2)."""
    d = bounds.shape[0]
    sampler = qmc.Sobol(d, scramble=True, seed=seeding.rng_from(*seed_entropy))
    m = max(1, math.ceil(math.log2(max(n, 1))))
    pts = sampler.random_base2(m)[:n]
    return qmc.scale(pts, bounds[:, 0], bounds[:, 1])


def _golden_line(fn, x, coord, lo, hi, best_val, n_evals=14):
    """Golden-section maximization along one coordinate; keeps only improvements."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    xc = x.copy()
    xc[coord] = c
    fc = fn(xc)
    xd = x.copy()
    xd[coord] = d
    fd = fn(xd)
    best_x, best = (xc.copy(), fc) if fc >= fd else (xd.copy(), fd)
    for _ in range(n_evals - 2):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            xc = x.copy()
            xc[coord] = c
            fc = fn(xc)
            if fc > best:
                best, best_x = fc, xc.copy()
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            xd = x.copy()
            xd[coord] = d
            fd = fn(xd)
            if fd > best:
                best, best_x = fd, xd.copy()
    if best > best_val:
        return best_x, best
    return x, best_val


def refine(fn_batch, x0: np.ndarray, v0: float, bounds: np.ndarray, n_iters: int):
    """Coordinate golden-section refinement from (x0, v0); monotone in value."""
    if n_iters <= 0:
        return x0, v0

    def fn(xp):
        return float(fn_batch(xp[None, :])[0])

    x, v = x0.copy(), v0
    span = bounds[:, 1] - bounds[:, 0]
    window = 0.1
    for _ in range(n_iters):
        for d in range(bounds.shape[0]):
            w = window * span[d]
            lo = max(bounds[d, 0], x[d] - w)
            hi = min(bounds[d, 1], x[d] + w)
            if hi <= lo:
                continue
            x, v = _golden_line(fn, x, d, lo, hi, v)
        window = max(window * 0.6, 1e-7)
    return x, v


def refine_scan(fn_batch, x0: np.ndarray, v0: float, bounds: np.ndarray, n_iters: int,
                points_per_line: int = 12):
    """Batched coordinate line search; one fn_batch call per line.

    Cheaper than golden-section when per-call overhead dominates (sample
    paths): probes an even lattice across the shrinking window and keeps
    the best point seen. Monotone in value, like ``refine``.
    """
    if n_iters <= 0:
        return x0, v0
    x, v = x0.copy(), v0
    span = bounds[:, 1] - bounds[:, 0]
    window = 0.1
    offsets = np.linspace(-1.0, 1.0, points_per_line)
    for _ in range(n_iters):
        for d in range(bounds.shape[0]):
            w = window * span[d]
            cand = np.tile(x, (points_per_line, 1))
            cand[:, d] = np.clip(x[d] + offsets * w, bounds[d, 0], bounds[d, 1])
            vals = np.asarray(fn_batch(cand), dtype=np.float64)
            best = int(np.argmax(vals))
            if vals[best] > v:
                v = float(vals[best])
                x = cand[best]
        window = max(window * 0.45, 1e-8)
    return x, v


def maximize(
    fn_batch,
    bounds: np.ndarray,
    grid_size: int,
    refine_iters: int,
    seed_entropy: tuple,
    extra_candidates: np.ndarray | None = None,
):
    """Maximize ``fn_batch`` over the box; returns (argmax, value).

    Ties on the grid break toward the lowest index. The returned value is
    never below the best grid value.
    """
    cand = sobol_points(grid_size, bounds, seed_entropy)
    if extra_candidates is not None and len(extra_candidates):
        cand = np.vstack([cand, np.clip(extra_candidates, bounds[:, 0], bounds[:, 1])])
    vals = np.asarray(fn_batch(cand), dtype=np.float64)
    idx = int(np.argmax(vals))
    return refine(fn_batch, cand[idx], float(vals[idx]), bounds, refine_iters)
