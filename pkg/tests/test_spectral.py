import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mplab import ContractError, DomainError
from mplab.ensemble import EnsembleConfig, sample_covariance, sample_matrix
from mplab.spectral import (
    HermitianResolvent,
    SpectralSample,
    eigen_spectrum,
    empirical_stieltjes,
    empirical_stieltjes_sym,
    esd,
    hermitize,
    remove_row,
    resolvent,
    spectral_sample,
    sym_esd,
)


def _gaussian(n, p, seed=0):
    return sample_matrix(EnsembleConfig(n, p, "gaussian", base_seed=seed), 0).entries


def test_hermitize_scalar():
    assert np.allclose(np.sort(np.linalg.eigvalsh(hermitize(np.array([[3.0]])))), [-3.0, 3.0])


def test_hermitize_zero():
    assert np.all(eigen_spectrum(hermitize(np.zeros((2, 3)))) == 0.0)


def test_hermitize_matches_svd_oracle():
    X = _gaussian(2, 3, seed=4)
    s = np.linalg.svd(X / math.sqrt(3), compute_uv=False)
    assert np.allclose(np.linalg.eigvalsh(hermitize(X)), np.sort([s[0], s[1], -s[0], -s[1], 0.0]), atol=1e-8)


def test_eigen_spectrum_examples():
    assert np.allclose(eigen_spectrum(np.eye(3)), [1, 1, 1])
    assert np.allclose(eigen_spectrum(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    with pytest.raises(ContractError):
        eigen_spectrum(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_eigen_spectrum_against_charpoly_oracle():
    rng = np.random.default_rng(12)
    A = rng.standard_normal((5, 5))
    M = A + A.T
    roots = np.sort(np.roots(np.poly(M)).real)
    assert np.allclose(eigen_spectrum(M), roots, atol=1e-7)


def test_eigen_residuals():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((30, 30))
    M = A + A.T
    w, U = eigen_spectrum(M, vectors=True)
    assert np.max(np.linalg.norm(M @ U - U * w, axis=0)) <= 1e-9 * np.linalg.norm(M, 2)


def test_spectral_sample_sorted_and_matches_svd():
    X = _gaussian(20, 40, seed=9)
    smp = spectral_sample(X, "abc", 3)
    sv = np.linalg.svd(X / math.sqrt(40), compute_uv=False)
    assert np.all(np.diff(smp.singular_values) <= 0)
    assert np.allclose(smp.singular_values, sv, atol=1e-10)
    assert smp.config_hash == "abc" and smp.trial_index == 3


def test_spectral_sample_zero_rank_atoms():
    X = np.zeros((4, 8))
    X[0, :] = 1.0
    s = spectral_sample(X).singular_values
    assert np.count_nonzero(s) == 1


def test_spectral_sample_json_round_trip():
    smp = spectral_sample(_gaussian(5, 9))
    back = SpectralSample.from_dict(json.loads(smp.to_json()))
    assert np.array_equal(back.singular_values, smp.singular_values)
    assert (back.n, back.p) == (5, 9)


def test_spectral_sample_validation():
    with pytest.raises(ContractError):
        SpectralSample(np.array([1.0, -0.1]), 2, 4)
    with pytest.raises(ContractError):
        SpectralSample(np.array([1.0]), 2, 4)


def test_esd_counting():
    smp = SpectralSample(np.sqrt([1.0, 2.0, 3.0, 4.0]), 4, 8)
    assert esd(smp, 2.5) == 0.5
    assert esd(smp, 0.5) == 0.0
    assert esd(smp, 10.0) == 1.0
    exact = SpectralSample(np.array([1.0, 2.0]), 2, 4)
    assert esd(exact, 4.0) == 1.0 and esd(exact, 1.0) == 0.5  # right-continuous


def test_sym_esd_jumps():
    smp = SpectralSample(np.array([2.0, 1.0]), 2, 4)
    xs = np.array([-2.5, -2.0, -1.5, -1.0, 0.0, 1.0, 1.5, 2.0])
    assert np.allclose(sym_esd(smp, xs), [0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0])


def test_empirical_stieltjes_single_atom():
    smp = SpectralSample(np.array([1.0]), 1, 2)
    assert empirical_stieltjes(smp, 1j) == pytest.approx((1 + 1j) / 2)


def test_empirical_stieltjes_matches_dense_inverse():
    X = _gaussian(10, 20, seed=2)
    smp = spectral_sample(X)
    z = 0.8 + 0.2j
    W = sample_covariance(X)
    dense = np.trace(np.linalg.inv(W - z * np.eye(10))) / 10
    assert empirical_stieltjes(smp, z) == pytest.approx(dense, abs=1e-10)
    assert empirical_stieltjes_sym(smp, z) == pytest.approx(z * empirical_stieltjes(smp, z * z), abs=1e-12)


def test_empirical_stieltjes_on_spectrum():
    smp = SpectralSample(np.array([1.0]), 1, 2)
    with pytest.raises(DomainError):
        empirical_stieltjes(smp, 1.0)
    with pytest.raises(DomainError):
        empirical_stieltjes_sym(smp, -1.0)


def test_resolvent_of_zero():
    R = resolvent(np.zeros((3, 3)), 1j)
    assert np.allclose(R.matrix, 1j * np.eye(3))


def test_resolvent_schur_block():
    X = _gaussian(3, 4, seed=5)
    z = 1 + 1j
    R = resolvent(hermitize(X), z).matrix
    W = X @ X.T / 4
    assert np.allclose(R[:3, :3], z * np.linalg.inv(W - z * z * np.eye(3)), atol=1e-8)


def test_resolvent_residual_and_herglotz():
    V = hermitize(_gaussian(6, 9, seed=1))
    z = -0.4 + 0.05j
    R = resolvent(V, z)
    assert np.linalg.norm((V - z * np.eye(15)) @ R.matrix - np.eye(15)) < 1e-8 * np.linalg.norm(R.matrix)
    assert np.all(R.diag().imag > 0)


def test_resolvent_singular_shift():
    with pytest.raises(DomainError):
        HermitianResolvent(np.diag([1.0, 2.0])).at(2.0)


def test_trace_identity():
    X = _gaussian(8, 20, seed=8)
    smp = spectral_sample(X)
    y = 8 / 20
    z = 0.3 + 0.7j
    hr = HermitianResolvent(hermitize(X))
    rhs = hr.trace(z) / 16 + (1 - y) / (2 * z * y)
    assert empirical_stieltjes_sym(smp, z) == pytest.approx(rhs, abs=1e-9)


def test_squared_is_derivative():
    hr = HermitianResolvent(hermitize(_gaussian(4, 6, seed=3)))
    z, h = 0.5 + 0.4j, 1e-6
    fd = (hr.at(z + h).matrix - hr.at(z - h).matrix) / (2 * h)
    assert np.allclose(hr.squared(z), fd, atol=1e-6)


def test_remove_row():
    X = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(remove_row(X, 0), X[1:])
    with pytest.raises(ContractError):
        remove_row(X, 2)
    with pytest.raises(ContractError):
        remove_row(X[:1], 0)


def test_interlacing_against_eigen_oracle():
    X = _gaussian(6, 10, seed=6)
    W = sample_covariance(X)
    lam = np.linalg.eigvalsh(W)
    for j in range(6):
        mu = np.linalg.eigvalsh(sample_covariance(remove_row(X, j)))
        assert np.all(lam[:-1] <= mu + 1e-12) and np.all(mu <= lam[1:] + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 6), st.integers(0, 2 ** 31))
def test_hermitization_spectrum_property(n, extra, seed):
    p = n + extra
    X = np.random.default_rng(seed).standard_normal((n, p))
    s = np.linalg.svd(X / math.sqrt(p), compute_uv=False)
    ev = eigen_spectrum(hermitize(X))
    assert np.allclose(ev, np.sort(np.concatenate([s, -s, np.zeros(p - n)])), atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 12), elements=st.floats(0.0, 10.0)),
    st.floats(-3, 3),
    st.floats(1e-3, 10),
)
def test_stieltjes_herglotz_property(sv, u, v):
    smp = SpectralSample(sv, sv.size, sv.size)
    z = complex(u, v)
    assert empirical_stieltjes(smp, z).imag > 0
    assert empirical_stieltjes_sym(smp, z).imag > 0
