"""Pure-NumPy implementations of the hot kernels.

Same contracts as the compiled module ``jesbo._core``; see ``_backend`` for
how one of the two gets selected at import time. Grid-scale path evaluation
runs in float32 on both backends (the argmax seed it produces is always
re-polished in float64 by the callers).
"""

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import erfcx

NAME = "numpy"

_SQRT_2PI = np.sqrt(2.0 * np.pi)
_LOG_2PI_E = np.log(2.0 * np.pi) + 1.0


def path_values(wt, b, theta, x):
    """Evaluate a cosine-feature path at a batch of points.

    wt: (D, F) float32, spectral frequencies transposed
    b: (F,) float32 phases, theta: (F,) float32 scaled weights
    x: (B, D) float32 points. Returns (B,) float64 values.
    """
    z = x @ wt
    z += b
    np.cos(z, out=z)
    return (z @ theta).astype(np.float64)


def se_cross(x1, x2, inv_ls2, output_scale):
    """Squared-exponential ARD cross-covariance matrix, shape (n1, n2)."""
    scaled1 = x1 * np.sqrt(inv_ls2)
    scaled2 = x2 * np.sqrt(inv_ls2)
    d2 = cdist(scaled1, scaled2, "sqeuclidean")
    d2 *= -0.5
    np.exp(d2, out=d2)
    d2 *= output_scale
    return d2


def upper_trunc_var_ratio(beta):
    """Variance ratio of an upper-truncated standard normal, elementwise.

    For truncation at ``beta`` (standardized bound), returns
    1 - beta*lam - lam**2 with lam = pdf(beta)/cdf(beta), computed through
    erfcx so the exp factors cancel exactly (no underflow for deep
    truncation); far tails switch to series/limit branches.
    """
    beta = np.asarray(beta, dtype=np.float64)
    out = np.ones_like(beta)
    deep = beta < -70.0
    mid = ~deep & (beta < 37.0)
    if np.any(mid):
        bm = beta[mid]
        lam = 2.0 / (_SQRT_2PI * erfcx(-bm / np.sqrt(2.0)))
        out[mid] = np.clip(1.0 - bm * lam - lam * lam, 0.0, 1.0)
    if np.any(deep):
        inv = 1.0 / beta[deep] ** 2
        out[deep] = inv * (1.0 - 6.0 * inv + 50.0 * inv * inv)
    return out


def avg_trunc_entropy(means, variances, f_stars, noise_variance):
    """Mean over ensemble members of the moment-matched predictive entropy.

    means, variances: (L, B) member posterior f-moments at B points
    f_stars: (L,) truncation bounds. Returns (B,) float64, the average of
    0.5*log(2*pi*e*(noise + trunc_var)) across members.
    """
    v = np.maximum(variances, 0.0)
    tiny = v < 1e-150
    s = np.sqrt(np.where(tiny, 1.0, v))
    beta = (f_stars[:, None] - means) / s
    tv = np.where(tiny, 0.0, v * upper_trunc_var_ratio(beta))
    total = np.maximum(noise_variance + tv, 1e-300)
    ent = 0.5 * (_LOG_2PI_E + np.log(total))
    return ent.mean(axis=0)
