import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncsvm.kernel import KernelError, KernelSpec, cross_kernel, kernel_eval, kernel_matrix


def test_gaussian_examples():
    g = KernelSpec.gaussian(1.0)
    assert kernel_eval(g, [0.0], [0.0]) == 1.0
    assert kernel_eval(g, [0.0], [1.0]) == pytest.approx(0.36787944117144233, abs=1e-15)


def test_linear_orthogonal_identity():
    X = np.eye(4)
    np.testing.assert_array_equal(kernel_matrix(KernelSpec.linear(), X), np.eye(4))


def test_invalid_gamma():
    with pytest.raises(KernelError):
        KernelSpec.gaussian(0.0)
    with pytest.raises(KernelError):
        KernelSpec.gaussian(-1.0)


def test_spec_round_trip():
    for spec in (KernelSpec.gaussian(0.125), KernelSpec.linear()):
        assert KernelSpec.from_dict(spec.to_dict()) == spec


def test_dimension_mismatch():
    with pytest.raises(KernelError):
        cross_kernel(KernelSpec.linear(), np.zeros((2, 3)), np.zeros((2, 4)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 30), st.integers(1, 6), st.floats(2**-15, 2**3), st.integers(0, 2**32 - 1))
def test_gram_symmetric_psd_and_pointwise(m, d, gamma, seed):
    X = np.random.default_rng(seed).normal(size=(m, d))
    spec = KernelSpec.gaussian(gamma)
    G = kernel_matrix(spec, X)
    np.testing.assert_array_equal(G, G.T)
    np.testing.assert_array_equal(np.diag(G), 1.0)
    assert np.linalg.eigvalsh(G).min() >= -1e-9
    i, j = m // 2, m - 1
    assert G[i, j] == pytest.approx(kernel_eval(spec, X[i], X[j]), abs=1e-12)
    np.testing.assert_allclose(cross_kernel(spec, X, X), G, atol=1e-12)
