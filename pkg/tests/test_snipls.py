import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import ols, pls1_one_component
from spadimo.errors import EmptySelection, InvalidInput, ZeroCovariance
from spadimo.snipls import snipls_fit, soft_threshold_weights


def _centered(rng, n, p):
    X = rng.standard_normal((n, p)) @ (np.eye(p) + 0.3 * rng.standard_normal((p, p)))
    return X - X.mean(axis=0)


def test_soft_threshold_single_survivor():
    assert soft_threshold_weights([4.0, 1.0, -1.0], 0.5).tolist() == [1.0, 0.0, 0.0]


def test_soft_threshold_plain_normalization():
    assert np.allclose(soft_threshold_weights([3.0, 4.0], 0.0), [0.6, 0.8])


def test_soft_threshold_keeps_sign_and_shrinks():
    w = soft_threshold_weights([4.0, -3.0, 1.0], 0.5)
    assert np.allclose(w, np.array([2.0, -1.0, 0.0]) / np.sqrt(5.0))


def test_soft_threshold_high_eta_unique_max(rng):
    z = rng.standard_normal(30)
    assert np.count_nonzero(soft_threshold_weights(z, 0.9)) == 1


def test_soft_threshold_errors():
    with pytest.raises(ZeroCovariance):
        soft_threshold_weights(np.zeros(3), 0.5)
    with pytest.raises(InvalidInput):
        soft_threshold_weights([1.0], 1.0)


def test_ties_at_the_maximum_survive_thresholding():
    assert np.allclose(soft_threshold_weights([2.0, -2.0], 0.99), np.array([1.0, -1.0]) / np.sqrt(2))


def test_empty_selection_is_reported(monkeypatch):
    import spadimo.snipls as mod
    # a threshold that removes every entry can only come from rounding; simulate it
    monkeypatch.setattr(mod.np, "maximum", lambda a, b: np.zeros_like(a))
    with pytest.raises(EmptySelection):
        soft_threshold_weights([1.0, 2.0], 0.5)


def test_one_component_matches_pls1(rng):
    for _ in range(20):
        X = _centered(rng, 30, 6)
        y = rng.standard_normal(30)
        b = snipls_fit(X, y, 1, 0.0).coefficients
        assert np.allclose(b, pls1_one_component(X, y), rtol=1e-10, atol=1e-14)


def test_full_components_match_least_squares(rng):
    for p in (1, 3, 8):
        X = _centered(rng, 40, p)
        y = rng.standard_normal(40)
        b = snipls_fit(X, y, p, 0.0).coefficients
        assert np.allclose(b, ols(X, y), rtol=1e-6, atol=1e-10)


def test_aligned_predictor(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((20, 4)))
    for eta in (0.0, 0.5, 0.95):
        b = snipls_fit(Q, Q[:, 0].copy(), 1, eta).coefficients
        assert np.allclose(b, [1.0, 0.0, 0.0, 0.0], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4), st.sampled_from([0.0, 0.3, 0.6, 0.9]))
def test_model_invariants(seed, h, eta):
    rng = np.random.default_rng(seed)
    X = _centered(rng, 25, 8)
    y = rng.standard_normal(25)
    m = snipls_fit(X, y, h, eta)
    support = np.any(m.weighting_vectors != 0.0, axis=0)
    assert np.all(m.coefficients[~support] == 0.0)
    assert set(m.selected) <= set(np.flatnonzero(support))
    assert np.allclose(np.linalg.norm(m.weighting_vectors, axis=1), 1.0)
    T = m.scores
    gram = T @ T.T
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() <= 1e-8 * np.diag(gram).max()
    # fitted values are the sum of rank-one regressions on the scores
    fitted = sum(T[k] * (T[k] @ y) / (T[k] @ T[k]) for k in range(h))
    assert np.allclose(m.predict(X), fitted, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100.0), st.sampled_from([0.0, 0.4, 0.8]))
def test_response_scale_equivariance(seed, c, eta):
    rng = np.random.default_rng(seed)
    X = _centered(rng, 25, 6)
    y = rng.standard_normal(25)
    a, b = snipls_fit(X, y, 2, eta), snipls_fit(X, c * y, 2, eta)
    assert np.array_equal(a.selected, b.selected)
    assert np.allclose(b.coefficients, c * a.coefficients, rtol=1e-9, atol=1e-12)


def test_sparsity_decreases_on_average(rng):
    etas = np.round(np.arange(0.1, 0.91, 0.1), 2)
    sizes = np.zeros(len(etas))
    for _ in range(200):
        X = _centered(rng, 30, 12)
        y = rng.standard_normal(30)
        sizes += [len(snipls_fit(X, y, 1, e).selected) for e in etas]
    assert np.all(np.diff(sizes) <= 0)


def test_zero_response_and_exhausted_deflation():
    with pytest.raises(InvalidInput):
        snipls_fit(np.eye(3), np.zeros(3))
    X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]])
    y = np.array([1.0, -1.0, 0.0])
    with pytest.raises(ZeroCovariance):
        snipls_fit(X, y, 2, 0.0)  # second component sees a fully deflated X


def test_scores_correlate_positively_with_response(rng):
    # t'y = w'X'y > 0, so a zero score vector cannot arise from a valid fit
    for eta in (0.0, 0.5, 0.9):
        X = _centered(rng, 20, 7)
        y = rng.standard_normal(20)
        m = snipls_fit(X, y, 3, eta)
        assert np.all(m.scores @ y > 0)


def test_shape_checks():
    with pytest.raises(InvalidInput):
        snipls_fit(np.eye(3), np.ones(2))
    with pytest.raises(InvalidInput):
        snipls_fit(np.eye(3), np.ones(3), h=0)

