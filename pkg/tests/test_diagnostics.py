import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mplab import ContractError
from mplab.diagnostics import (
    KAPPA,
    DiagnosticRecord,
    RegionSpec,
    RowRemoval,
    edge_lower_bounds,
    epsilon_decompose,
    kappa_mass,
    lambda_n,
    monotone_in_v,
    quadratic_form_q,
    region_g_membership,
    row_sum_bound,
    sym_transform,
)
from mplab.ensemble import EnsembleConfig, sample_matrix
from mplab.mp_law import MPLaw, mp_ppf
from mplab.spectral import HermitianResolvent, SpectralSample, hermitize


def _matrix(n, p, seed=0, dist="rademacher"):
    return sample_matrix(EnsembleConfig(n, p, dist, base_seed=seed), 0).entries


def _rel(a, b):
    return abs(a - b) / (1 + abs(b))


def test_kappa():
    assert KAPPA == pytest.approx(1 + math.sqrt(2), abs=1e-15)
    assert kappa_mass(KAPPA) == pytest.approx(0.75, abs=1e-12)
    assert math.tan(3 * math.pi / 8) == pytest.approx(KAPPA, abs=1e-12)


def test_diagonal_representation_all_ones():
    X = np.ones((4, 6))
    e = epsilon_decompose(X, 0.7 + 0.3j, 1)
    assert e.residual < 1e-10


@pytest.mark.parametrize("z", [1 + 0.5j, -0.6 + 0.05j, 0.2 + 2j])
def test_epsilon_reconstructs_diagonal(z):
    rr = RowRemoval(_matrix(12, 20, seed=4))
    for j in range(12):
        assert rr.epsilon(z, j).residual < 1e-8


def test_epsilon_rejects_lower_half_plane():
    with pytest.raises(ContractError):
        epsilon_decompose(np.ones((3, 4)), 1 - 1j, 0)
    with pytest.raises(ContractError):
        RowRemoval(np.ones((3, 4))).minor(3)


def test_eps3_bound():
    rr = RowRemoval(_matrix(16, 32, seed=7, dist="gaussian"))
    for v in (0.01, 0.1, 1.0):
        z = complex(0.9, v)
        for j in range(16):
            assert abs(rr.epsilon(z, j).eps3) <= 2 / (16 * v)


def test_row_removal_identities():
    rr = RowRemoval(_matrix(10, 15, seed=2))
    for z in (1.1 + 0.02j, 0.4 + 0.8j):
        assert _rel(*rr.eps3_sum(z)) < 1e-8
        for j in (0, 5, 9):
            assert _rel(*rr.trace_gap(z, j)) < 1e-10
            assert _rel(*rr.transform_gap(z, j)) < 1e-10


def test_trace_and_lower_block_identities():
    rr = RowRemoval(_matrix(9, 21, seed=5, dist="gaussian"))
    z = 0.5 + 0.3j
    assert _rel(*rr.trace_identity(z)) < 1e-10
    assert _rel(*rr.lower_block_identity(z)) < 1e-10


def test_derivative_identity_against_finite_differences():
    rr = RowRemoval(_matrix(8, 12, seed=1, dist="gaussian"))
    z, h = 0.8 + 0.3j, 1e-5
    for j in range(8):
        lhs, rhs = rr.derivative_identity(z, j)
        assert _rel(lhs, rhs) < 1e-10
        fd = (rr.full.diagonal(z + h)[j] - rr.full.diagonal(z - h)[j]) / (2 * h)
        assert _rel(fd, rhs) < 1e-6


def test_quadratic_form_zero_row():
    X = _matrix(5, 8, seed=3)
    X = np.array(X)
    X[2] = 0.0
    assert quadratic_form_q(X, 1 + 1j, [0], 2) == 0.0


def test_quadratic_form_by_hand():
    # n = p = 2, J empty, j = 0: only l = 2, k = 1 contributes
    X = np.array([[1.3, -0.4], [0.7, 2.1]])
    z = 0.6 + 0.25j
    x1 = X[1] / math.sqrt(2)
    V = np.zeros((3, 3))
    V[0, 1:] = x1
    V[1:, 0] = x1
    R = np.linalg.inv(V - z * np.eye(3))
    expected = abs(X[0, 0] * R[1, 2]) ** 2 / 2
    assert quadratic_form_q(X, z, [], 0) == pytest.approx(expected, rel=1e-12)


def test_quadratic_form_contract():
    X = np.ones((3, 4))
    with pytest.raises(ContractError):
        quadratic_form_q(X, 1j, [0], 0)
    with pytest.raises(ContractError):
        quadratic_form_q(X, 1j, [0, 1], 2)


def test_quadratic_form_grows_as_v_halves():
    # in the bulk E Q scales like 1/v, so halving v roughly doubles it
    cfg = EnsembleConfig(20, 40, trials=500, base_seed=3)
    Xs = [sample_matrix(cfg, t).entries for t in range(cfg.trials)]
    a = np.mean([quadratic_form_q(X, 1 + 0.1j, [], 0) for X in Xs])
    b = np.mean([quadratic_form_q(X, 1 + 0.05j, [], 0) for X in Xs])
    assert 1.3 <= b / a <= 3.0


def _quantile_sample(law, n):
    q = (np.arange(1, n + 1) - 0.5) / n
    s = np.sqrt([mp_ppf(law, x) for x in q])[::-1]
    return SpectralSample(s, n, int(round(n / law.y)))


def test_lambda_n_quantile_construction_decays():
    law = MPLaw(0.5)
    for z in (1 + 0.5j, 1.2 + 0.1j):
        vals = [abs(lambda_n(_quantile_sample(law, n), z, law)) for n in (50, 100, 200)]
        assert vals[0] > vals[1] > vals[2]
        assert all(n * v < 1.0 for n, v in zip((50, 100, 200), vals))


def test_lambda_n_far_from_axis():
    law = MPLaw(0.5)
    smp = SpectralSample(np.array([3.0, 0.1]), 2, 4)
    v = 1e6
    assert abs(lambda_n(smp, 1j * v, law)) <= 2 / v
    with pytest.raises(ContractError):
        lambda_n(smp, 1.0, law)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(1e-3, 5), st.integers(0, 1000))
def test_lambda_n_odd_symmetry(u, v, seed):
    law = MPLaw(0.5)
    s = np.sort(np.random.default_rng(seed).uniform(0, 2, 6))[::-1]
    smp = SpectralSample(s, 6, 12)
    z = complex(u, v)
    assert lambda_n(smp, -z.conjugate(), law) == pytest.approx(-lambda_n(smp, z, law).conjugate(), abs=1e-12)


def test_sym_transform_normalizer():
    assert sym_transform([1.0], 1j) == pytest.approx(1j / 2)
    assert sym_transform([1.0], 1j, n=2) == pytest.approx(1j / 4)


def test_region_membership_examples():
    law = MPLaw(0.5)
    spec = RegionSpec.for_law(law, 1000)
    assert spec.v0 == pytest.approx(1e-3)
    assert spec.eps ** 1.5 == pytest.approx(2 * spec.v0 * KAPPA)
    assert spec.V == pytest.approx(4 * math.sqrt(0.5))
    assert region_g_membership(1 + 0.1j, law, spec).in_region_g
    assert region_g_membership(-1 + 0.1j, law, spec).in_region_g
    assert not region_g_membership(1 + 5j, law, spec).in_region_g  # above V
    assert not region_g_membership(0.1 + 0.1j, law, spec).in_region_g  # inside the gap
    assert not region_g_membership(complex(law.b - spec.eps / 2, 0.1), law, spec).in_region_g
    assert not region_g_membership(1 + 1e-5j, law, spec).in_region_g  # below v0/sqrt(gamma)


def test_region_spec_rejects_small_n():
    with pytest.raises(ContractError):
        RegionSpec.for_law(MPLaw(0.5), 5, A0=4.0)
    spec = RegionSpec.for_law(MPLaw(0.5), 1000, C8=2.0)
    assert spec.eps == pytest.approx(2.0 * 1e-2)
    assert set(spec.to_dict()) == {"A0", "n", "V", "eps", "kappa"}


@pytest.mark.parametrize("y", [0.25, 0.5, 1.0])
def test_edge_lower_bounds_in_region(y):
    law = MPLaw(y)
    spec = RegionSpec.for_law(law, 500)
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(400):
        u = rng.uniform(law.a, law.b) * rng.choice([-1, 1])
        v = math.exp(rng.uniform(math.log(spec.v0), math.log(spec.V)))
        z = complex(u, v)
        if not region_g_membership(z, law, spec).in_region_g:
            continue
        (e, lb), (nv, lb2) = edge_lower_bounds(z, law, spec)
        assert e >= lb and nv >= lb2
        checked += 1
    assert checked > 100


def test_row_sum_ward_equality():
    hr = HermitianResolvent(hermitize(_matrix(6, 10, seed=9, dist="gaussian")))
    z = 0.3 + 0.07j
    R = hr.at(z).matrix
    for l in range(16):
        lhs, rhs = row_sum_bound(R, l, z.imag)
        assert lhs == pytest.approx(rhs, rel=1e-10)
        part, _ = row_sum_bound(R, l, z.imag, cols=slice(6, None))
        assert part <= rhs + 1e-12


def test_monotone_in_v():
    hr = HermitianResolvent(hermitize(_matrix(6, 10, seed=9)))
    for z in (0.3 + 0.07j, 1.4 + 0.5j, -1 + 0.002j):
        for l in range(16):
            for s in (2, 4, 16):
                lo, hi = monotone_in_v(hr, z, l, s)
                assert lo <= hi + 1e-12


def test_diagnostic_record_dict():
    r = DiagnosticRecord("x.y", {"n": 3}, 0.1, 0.2, True)
    assert r.to_dict() == {"check_name": "x.y", "params": {"n": 3}, "statistic": 0.1, "bound": 0.2, "pass": True}
