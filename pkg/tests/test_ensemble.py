import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from mplab import ContractError, DomainError
from mplab.ensemble import (
    DataMatrix,
    EnsembleConfig,
    EntryDistribution,
    center_normalize,
    load_config,
    prepared_matrix,
    sample_covariance,
    sample_matrix,
    truncate_entries,
    truncation_const_for,
)

DISTS = ["rademacher", "gaussian", "uniform_scaled", "two_point"]


@pytest.mark.parametrize("name", DISTS)
def test_unit_variance_closed_form(name):
    d = EntryDistribution(name, 0.2) if name == "two_point" else EntryDistribution(name)
    mean, second = d.truncated_moments(None)
    assert mean == 0.0 and second == 1.0
    # an infinite level must reproduce the untruncated moments
    mean, second = d.truncated_moments(1e6)
    assert mean == pytest.approx(0.0, abs=1e-15)
    assert second == pytest.approx(1.0, abs=1e-12)


def test_two_point_moments():
    d = EntryDistribution("two_point", 0.3)
    vals, probs = d.atoms()
    assert np.sum(probs * vals) == pytest.approx(0.0, abs=1e-15)
    assert np.sum(probs * vals ** 2) == pytest.approx(1.0, abs=1e-15)
    q = 0.3
    assert d.mu4 == pytest.approx(1 / (q * (1 - q)) - 3)


def test_two_point_with_mu4():
    d = EntryDistribution.two_point_with_mu4(3.0)
    assert d.mu4 == pytest.approx(3.0, rel=1e-12)
    assert d.q == pytest.approx(0.2113248654, abs=1e-9)
    with pytest.raises(DomainError):
        EntryDistribution.two_point_with_mu4(0.5)


def test_two_point_sample_fourth_moment():
    d = EntryDistribution.two_point_with_mu4(3.0)
    x = d.sample(np.random.default_rng(7), (10_000,))
    assert np.mean(x ** 4) == pytest.approx(3.0, rel=0.05)


def test_rademacher_support():
    X = sample_matrix(EnsembleConfig(12, 30, base_seed=99), 0)
    assert set(np.unique(X.entries)) <= {-1.0, 1.0}


def test_determinism_and_trial_independence():
    cfg = EnsembleConfig(10, 20, "gaussian", trials=3, base_seed=5)
    a, b = sample_matrix(cfg, 1), sample_matrix(cfg, 1)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, sample_matrix(cfg, 2).entries)
    # sizes are part of the stream key
    other = EnsembleConfig(10, 21, "gaussian", trials=3, base_seed=5)
    assert not np.array_equal(a.entries[:, :20], sample_matrix(other, 1).entries[:, :20])


def test_trial_index_bounds():
    cfg = EnsembleConfig(4, 4, trials=2)
    with pytest.raises(ContractError):
        sample_matrix(cfg, 2)


@pytest.mark.parametrize("kw", [dict(n=1, p=3), dict(n=5, p=4), dict(n=3, p=3, trials=0), dict(n=3, p=3, trunc_const=0)])
def test_config_validation(kw):
    with pytest.raises(ContractError):
        EnsembleConfig(**kw)


def test_config_round_trip(tmp_path):
    cfg = EnsembleConfig(16, 40, EntryDistribution("two_point", 0.1), 1.5, 7, 123)
    d = cfg.to_dict()
    assert d["schema_version"] == 1
    path = tmp_path / "c.json"
    path.write_text(json.dumps(d))
    back = load_config(path)
    assert back == cfg
    assert back.config_hash() == cfg.config_hash()
    assert len(cfg.config_hash()) == 12


def test_config_from_y_and_mu4():
    cfg = EnsembleConfig.from_dict({"n": 100, "y": 0.5, "entry_dist": {"mu4": 3.0}})
    assert cfg.p == 200
    assert cfg.entry_dist.mu4 == pytest.approx(3.0)
    with pytest.raises(ContractError):
        EnsembleConfig.from_dict({"n": 10, "p": 20, "colour": "red"})


def test_with_size():
    cfg = EnsembleConfig(128, 256).with_size(1024)
    assert (cfg.n, cfg.p) == (1024, 2048)


def test_truncate_examples():
    X = sample_matrix(EnsembleConfig(16, 32, base_seed=1), 0)
    Xt, zeroed = truncate_entries(X, 1.0)
    assert zeroed == 0 and np.array_equal(Xt.entries, X.entries)

    n = 16
    arr = np.ones((n, 20))
    arr[3, 4] = 10 * n ** 0.25
    Xt, zeroed = truncate_entries(DataMatrix.from_array(arr), 1.0)
    assert zeroed == 1 and Xt.entries[3, 4] == 0.0
    assert Xt.trunc_level == pytest.approx(2.0)


def test_gaussian_truncation_fraction():
    n, p = 100, 400
    cfg = EnsembleConfig(n, p, "gaussian", trials=20, base_seed=3)
    t = n ** 0.25
    zeroed = sum(truncate_entries(sample_matrix(cfg, k), 1.0)[1] for k in range(cfg.trials))
    expected = 2 * norm.sf(t) * n * p * cfg.trials
    # Poisson count: within 4 standard deviations
    assert abs(zeroed - expected) < 4 * math.sqrt(expected)


@pytest.mark.parametrize("name", ["gaussian", "uniform_scaled"])
def test_truncated_moments_against_quad(name):
    d = EntryDistribution(name)
    pdf = norm.pdf if name == "gaussian" else (lambda x: 1 / (2 * math.sqrt(3)) if abs(x) <= math.sqrt(3) else 0.0)
    for t in (0.5, 1.2, 3.0):
        lim = min(t, math.sqrt(3)) if name == "uniform_scaled" else t
        second = quad(lambda x: x * x * pdf(x), -lim, lim)[0]
        assert d.truncated_moments(t)[1] == pytest.approx(second, abs=1e-12)


def test_truncation_const_for_gaussian():
    d = EntryDistribution("gaussian")
    c = truncation_const_for(d, 256, 512, 3.0)
    assert 2 * norm.sf(c * 256 ** 0.25) * 256 * 512 == pytest.approx(3.0, rel=1e-10)
    with pytest.raises(DomainError):
        truncation_const_for(EntryDistribution("rademacher"), 256, 512, 3.0)


def test_center_normalize_identity_for_rademacher():
    X = sample_matrix(EnsembleConfig(8, 16), 0)
    Y = center_normalize(truncate_entries(X, 1.0)[0])
    assert np.array_equal(Y.entries, X.entries) and Y.normalized


def test_center_normalize_two_point_moments():
    # level 2 removes the large atom sqrt(9) of this two-point law
    d = EntryDistribution("two_point", 0.1)
    vals, probs = d.atoms()
    mean, second = d.truncated_moments(2.0)
    assert mean == pytest.approx(probs[0] * vals[0])
    assert second == pytest.approx(probs[0] * vals[0] ** 2)
    n = 1000
    raw = DataMatrix(d.sample(np.random.default_rng(0), (n, n)), d)
    Xt, zeroed = truncate_entries(raw, 2.0 / n ** 0.25)
    assert zeroed > 0
    out = center_normalize(Xt).entries
    # after truncation each entry is a scaled Bernoulli; standardized 4th moment
    r = probs[0]
    mu4 = (1 - 3 * r + 3 * r * r) / (r * (1 - r))
    se = 1 / n
    assert abs(out.mean()) < 3 * se
    assert abs(out.var() - 1) < 3 * math.sqrt(mu4 - 1) * se


def test_center_normalize_degenerate():
    d = EntryDistribution("rademacher")
    with pytest.raises(DomainError):
        center_normalize(DataMatrix(np.zeros((2, 2)), d, trunc_level=0.5))


def test_sample_covariance():
    arr = np.zeros((3, 4))
    arr[0] = 2.0
    W = sample_covariance(arr)
    assert W[0, 0] == pytest.approx(4.0)
    assert np.array_equal(W, W.T)
    assert sample_covariance(np.array([[1.0, 2.0, 3.0]]))[0, 0] == pytest.approx(14 / 3)
    X = sample_matrix(EnsembleConfig(20, 25, "gaussian"), 0)
    assert np.linalg.eigvalsh(sample_covariance(X)).min() >= -1e-12


def test_pipeline_is_pure():
    cfg = EnsembleConfig(16, 32, "gaussian", trunc_const=0.6, trials=2, base_seed=11)
    a = prepared_matrix(cfg, 1, truncate=True)
    b = prepared_matrix(cfg, 1, truncate=True)
    assert np.array_equal(a.entries, b.entries) and a.normalized


def test_data_matrix_is_read_only():
    X = sample_matrix(EnsembleConfig(4, 4), 0)
    with pytest.raises(ValueError):
        X.entries[0, 0] = 5.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.1, 50.0))
def test_two_point_truncated_variance_in_unit_interval(q, level):
    mean, second = EntryDistribution("two_point", q).truncated_moments(level)
    assert 0.0 <= second - mean * mean <= 1.0 + 1e-12
