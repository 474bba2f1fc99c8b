# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled hot kernels: cosine-feature path evaluation, SE-ARD
cross-covariance, and truncated-Gaussian entropy averaging.

Contracts mirror ``jesbo._core_py`` exactly; discrepancies between the two
backends are caught by tests/test_backends.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, cosf, exp, log, sqrt
from scipy.special.cython_special cimport erfcx

NAME = "compiled"

cdef double SQRT_2PI = 2.5066282746310002
cdef double SQRT_2 = 1.4142135623730951
cdef double LOG_2PI_E = 2.8378770664093453


cdef inline double _trunc_ratio(double beta) noexcept:
    # variance ratio of an upper-truncated standard normal; branches match
    # the NumPy backend (erfcx mid-range, series in the deep tail)
    cdef double lam, rho, inv
    if beta >= 37.0:
        return 1.0
    if beta < -70.0:
        inv = 1.0 / (beta * beta)
        return inv * (1.0 - 6.0 * inv + 50.0 * inv * inv)
    lam = 2.0 / (SQRT_2PI * erfcx(-beta / SQRT_2))
    rho = 1.0 - beta * lam - lam * lam
    if rho < 0.0:
        rho = 0.0
    elif rho > 1.0:
        rho = 1.0
    return rho


def path_values(const float[:, ::1] wt, const float[::1] b,
                const float[::1] theta, const float[:, ::1] x):
    """Evaluate a cosine-feature path at a batch of points.

    wt: (D, F) float32, b/theta: (F,) float32, x: (B, D) float32.
    Returns (B,) float64.
    """
    cdef Py_ssize_t B = x.shape[0], D = x.shape[1], F = wt.shape[1]
    cdef Py_ssize_t j, f, d
    cdef float acc, xd
    out_arr = np.empty(B, dtype=np.float64)
    cdef double[::1] out = out_arr
    z_arr = np.empty(F, dtype=np.float32)
    cdef float[::1] z = z_arr
    for j in range(B):
        for f in range(F):
            z[f] = b[f]
        for d in range(D):
            xd = x[j, d]
            for f in range(F):
                z[f] += wt[d, f] * xd
        acc = 0.0
        for f in range(F):
            acc += theta[f] * cosf(z[f])
        out[j] = acc
    return out_arr


def se_cross(const double[:, ::1] x1, const double[:, ::1] x2,
             const double[::1] inv_ls2, double output_scale):
    """Squared-exponential ARD cross-covariance matrix, shape (n1, n2)."""
    cdef Py_ssize_t n1 = x1.shape[0], n2 = x2.shape[0], D = x1.shape[1]
    cdef Py_ssize_t i, j, d
    cdef double diff, xd, w
    out_arr = np.empty((n1, n2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    d2_arr = np.empty(n2, dtype=np.float64)
    cdef double[::1] d2 = d2_arr
    for i in range(n1):
        for j in range(n2):
            d2[j] = 0.0
        for d in range(D):
            xd = x1[i, d]
            w = inv_ls2[d]
            for j in range(n2):
                diff = xd - x2[j, d]
                d2[j] += diff * diff * w
        for j in range(n2):
            out[i, j] = output_scale * exp(-0.5 * d2[j])
    return out_arr


def upper_trunc_var_ratio(beta):
    """Variance ratio of an upper-truncated standard normal, elementwise."""
    beta_arr = np.ascontiguousarray(np.atleast_1d(np.asarray(beta, dtype=np.float64)))
    cdef double[::1] bv = beta_arr.reshape(-1)
    out_arr = np.empty(bv.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(bv.shape[0]):
        out[i] = _trunc_ratio(bv[i])
    return out_arr.reshape(np.shape(beta)) if np.ndim(beta) else out_arr[0]


def avg_trunc_entropy(const double[:, ::1] means, const double[:, ::1] variances,
                      const double[::1] f_stars, double noise_variance):
    """Mean over members of 0.5*log(2*pi*e*(noise + trunc_var)), shape (B,)."""
    cdef Py_ssize_t L = means.shape[0], B = means.shape[1]
    cdef Py_ssize_t l, j
    cdef double v, beta, tv, total, fs
    out_arr = np.zeros(B, dtype=np.float64)
    cdef double[::1] out = out_arr
    for l in range(L):
        fs = f_stars[l]
        for j in range(B):
            v = variances[l, j]
            if v < 1e-150:
                tv = 0.0
            else:
                beta = (fs - means[l, j]) / sqrt(v)
                tv = v * _trunc_ratio(beta)
            total = noise_variance + tv
            if total < 1e-300:
                total = 1e-300
            out[j] += 0.5 * (LOG_2PI_E + log(total))
    cdef double inv = 1.0 / L
    for j in range(B):
        out[j] *= inv
    return out_arr
