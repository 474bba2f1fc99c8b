"""Compiled core vs NumPy fallback equivalence."""

import numpy as np
import pytest

from jesbo import _core_py

compiled = pytest.importorskip("jesbo._core", reason="compiled core not built")


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def test_se_cross_matches(rng):
    x1 = rng.random((37, 4))
    x2 = rng.random((23, 4))
    inv_ls2 = 1.0 / rng.uniform(0.1, 2.0, 4) ** 2
    a = compiled.se_cross(x1, x2, inv_ls2, 3.7)
    b = _core_py.se_cross(x1, x2, inv_ls2, 3.7)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_trunc_var_ratio_matches():
    # fast-math reassociation in the compiled core costs a few ulps, which
    # the cancellation near the deep-tail boundary amplifies to ~1e-9
    beta = np.concatenate([np.linspace(-200, 60, 2001), [-70.0, -69.999, 37.0, 36.999]])
    a = compiled.upper_trunc_var_ratio(beta)
    b = _core_py.upper_trunc_var_ratio(beta)
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-15)


def test_avg_trunc_entropy_matches(rng):
    means = rng.normal(0, 2, (16, 101))
    variances = rng.uniform(0, 3, (16, 101))
    variances[0, :3] = 0.0
    f_stars = rng.normal(1, 2, 16)
    a = compiled.avg_trunc_entropy(means, variances, f_stars, 0.17)
    b = _core_py.avg_trunc_entropy(means, variances, f_stars, 0.17)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_path_values_matches(rng):
    f, d, bsz = 512, 3, 200
    wt = rng.standard_normal((d, f)).astype(np.float32)
    b = rng.uniform(0, 2 * np.pi, f).astype(np.float32)
    theta = rng.standard_normal(f).astype(np.float32)
    x = rng.random((bsz, d)).astype(np.float32)
    a = compiled.path_values(wt, b, theta, x)
    ref = _core_py.path_values(wt, b, theta, x)
    scale = np.abs(ref).max()
    np.testing.assert_allclose(a, ref, rtol=0, atol=5e-4 * max(scale, 1.0))
