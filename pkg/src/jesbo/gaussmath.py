"""Scalar Gaussian utilities.

Standard-normal pdf/cdf, moments of an upper-truncated Gaussian, Gaussian
differential entropy, and a Monte Carlo estimator for the entropy of
(truncated Gaussian + independent Gaussian noise). Everything is in nats.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, log_ndtr, ndtr
from scipy.stats import truncnorm

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_2 = math.sqrt(2.0)
_LOG_2PI_E = math.log(2.0 * math.pi) + 1.0


@dataclass(frozen=True)
class TruncatedMoments:
    """First two moments of an upper-truncated Gaussian.

    mean, variance: moments of the truncated density (output units and
    squared output units); log_mass: log of the retained probability mass.
    """

    mean: float
    variance: float
    log_mass: float


def std_normal(z: float) -> tuple[float, float]:
    """Standard normal density and distribution function at ``z``."""
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z}")
    pdf = math.exp(-0.5 * z * z) / _SQRT_2PI
    return pdf, float(ndtr(z))


def inverse_mills(beta: float) -> float:
    """pdf(beta)/cdf(beta) for a standard normal, stable for deep beta.

    Written through erfcx so the exponential factors cancel exactly; the
    ratio stays accurate far beyond where cdf(beta) underflows.
    """
    if beta > 37.0:
        # cdf is 1 to machine precision and pdf underflows soon after
        return math.exp(-0.5 * beta * beta) / _SQRT_2PI
    return 2.0 / (_SQRT_2PI * erfcx(-beta / _SQRT_2))


def trunc_var_ratio(beta: float) -> float:
    """Variance of an upper-truncated standard normal, relative to 1.

    1 - beta*lam - lam^2 suffers catastrophic cancellation once
    |beta| >> 1, so the deep tail switches to the series expansion
    (1 - 6/t^2 + 50/t^4)/t^2 with t = -beta.
    """
    if beta >= 37.0:
        return 1.0
    if beta < -70.0:
        t2 = beta * beta
        return (1.0 - 6.0 / t2 + 50.0 / (t2 * t2)) / t2
    lam = inverse_mills(beta)
    return min(max(1.0 - beta * lam - lam * lam, 0.0), 1.0)


def truncated_moments(mu: float, var: float, upper: float) -> TruncatedMoments:
    """Moments of Normal(mu, var) truncated to (-inf, upper]."""
    if var <= 0.0:
        raise ValueError(f"var must be positive, got {var}")
    sigma = math.sqrt(var)
    beta = (upper - mu) / sigma
    lam = inverse_mills(beta)
    mean = min(mu - sigma * lam, upper)
    variance = var * trunc_var_ratio(beta)
    return TruncatedMoments(mean=mean, variance=variance, log_mass=float(log_ndtr(beta)))


def gaussian_entropy(var: float) -> float:
    """Differential entropy of a Gaussian with variance ``var``, in nats."""
    if var <= 0.0:
        raise ValueError(f"var must be positive, got {var}")
    return 0.5 * (_LOG_2PI_E + math.log(var))


def esn_log_density(y, mu: float, var_f: float, var_noise: float, upper: float):
    """Log density of y = f + eps, f ~ upper-truncated N(mu, var_f), eps ~ N(0, var_noise).

    The convolution has a closed form: the product of the two Gaussian
    factors splits into a marginal over y and a conditional over f, so the
    truncated integral reduces to a normal cdf.
    """
    y = np.asarray(y, dtype=np.float64)
    beta = (upper - mu) / math.sqrt(var_f)
    if var_noise <= 0.0:
        z = (y - mu) / math.sqrt(var_f)
        logp = -0.5 * z * z - math.log(_SQRT_2PI * math.sqrt(var_f)) - log_ndtr(beta)
        return np.where(y <= upper, logp, -np.inf)
    s2 = var_f + var_noise
    cond_mean = (mu * var_noise + y * var_f) / s2
    cond_sd = math.sqrt(var_f * var_noise / s2)
    z = (y - mu) / math.sqrt(s2)
    return (
        -0.5 * z * z
        - math.log(_SQRT_2PI * math.sqrt(s2))
        + log_ndtr((upper - cond_mean) / cond_sd)
        - log_ndtr(beta)
    )


def mc_truncation_entropy(
    mu: float,
    var_f: float,
    var_noise: float,
    upper: float,
    n_samples: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the entropy of truncated-f plus noise.

    Draws ``n_samples`` of y = f + eps and averages -log p(y) under the
    exact convolved density. Returns (estimate, standard error); the
    estimate is deterministic given ``seed``.
    """
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    if var_f <= 0.0:
        raise ValueError(f"var_f must be positive, got {var_f}")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7A3F)))
    sigma_f = math.sqrt(var_f)
    beta = (upper - mu) / sigma_f
    f = truncnorm.rvs(-np.inf, beta, loc=mu, scale=sigma_f, size=n_samples, random_state=rng)
    y = f
    if var_noise > 0.0:
        y = f + rng.normal(0.0, math.sqrt(var_noise), size=n_samples)
    neg_logp = -esn_log_density(y, mu, var_f, var_noise, upper)
    entropy = float(np.mean(neg_logp))
    std_err = float(np.std(neg_logp, ddof=1) / math.sqrt(n_samples))
    return entropy, std_err
