import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import mahalanobis_explicit, qn_brute, weighted_mean_cov
from spadimo.errors import DegenerateColumn, DegenerateWeights, InvalidInput, SingularMatrix
from spadimo.robust import (
    CaseWeights,
    DataMatrix,
    concentration_steps,
    detect_weights,
    mahalanobis_sq,
    outlyingness_sq,
    qn_scale,
    standardize,
    weighted_moments,
)
from spadimo.simlab import toy_dataset


def test_data_matrix_validation():
    with pytest.raises(InvalidInput):
        DataMatrix(np.ones((1, 3)))
    with pytest.raises(InvalidInput):
        DataMatrix(np.array([[1.0, np.inf], [0.0, 0.0]]))
    with pytest.raises(InvalidInput):
        DataMatrix(np.ones((3, 2)), ("a",))
    assert DataMatrix(np.ones((3, 2))).names() == ["1", "2"]


def test_case_weights_validation():
    with pytest.raises(InvalidInput):
        CaseWeights([0.5, 1.2])
    with pytest.raises(DegenerateWeights):
        CaseWeights([1.0, 0.0, 0.0])
    assert CaseWeights([1.0, 0.5, 1.0]).n_w == 2.5


def test_qn_constant_is_zero():
    assert qn_scale([5.0, 5.0, 5.0, 5.0]) == 0.0


def test_qn_five_points():
    # pairwise gaps of 1..5 sorted: 1,1,1,1,2,...; third smallest is 1
    assert qn_scale([1, 2, 3, 4, 5]) == pytest.approx(2.2219 * 0.844 * 1.0, rel=1e-15)


def test_qn_matches_enumeration(rng):
    for _ in range(200):
        n = int(rng.integers(2, 41))
        x = rng.standard_normal(n) * rng.uniform(0.1, 10)
        assert qn_scale(x) == pytest.approx(qn_brute(x), rel=1e-15)


def test_qn_consistent_for_normal(rng):
    assert qn_scale(rng.standard_normal(10_000)) == pytest.approx(1.0, rel=0.05)


def test_qn_rejects_short_or_nonfinite():
    with pytest.raises(InvalidInput):
        qn_scale([1.0])
    with pytest.raises(InvalidInput):
        qn_scale([1.0, np.nan, 2.0])


def test_standardize_centers_and_scales(rng):
    X = rng.standard_normal((101, 3)) * [1.0, 30.0, 0.01] + [5.0, -2.0, 100.0]
    Z, params = standardize(DataMatrix(X, ("a", "b", "c")))
    assert Z.column_names == ("a", "b", "c")
    assert np.allclose(np.median(Z.values, axis=0), 0.0, atol=1e-12)
    for j in range(3):
        assert qn_scale(Z.values[:, j]) == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(params.invert(Z.values), X)


def test_standardize_small_column():
    Z, params = standardize(np.array([[1.0], [2.0], [3.0]]))
    assert params.centers[0] == 2.0
    assert np.median(Z) == 0.0


def test_standardize_rejects_constant_column():
    with pytest.raises(DegenerateColumn) as info:
        standardize(np.array([[1.0, 3.0], [2.0, 3.0], [4.0, 3.0]]))
    assert info.value.column == 1


def test_weighted_moments_unit_weights_is_sample_moments(rng):
    X = rng.standard_normal((30, 4))
    s = weighted_moments(X, np.ones(30))
    assert np.allclose(s.location, X.mean(axis=0))
    assert np.allclose(s.scatter, np.cov(X, rowvar=False))
    assert s.effective_df == 4


def test_weighted_moments_excludes_zero_weight_row():
    s = weighted_moments(np.array([[0.0, 0.0], [2.0, 2.0], [99.0, 99.0]]), [1.0, 1.0, 0.0])
    assert np.allclose(s.location, [1.0, 1.0])


def test_weighted_moments_equal_subset_moments(rng):
    X = rng.standard_normal((40, 5))
    w = (rng.uniform(size=40) > 0.3).astype(float)
    s = weighted_moments(X, w)
    mu, cov = weighted_mean_cov(X, w)
    assert np.allclose(s.location, mu)
    assert np.allclose(s.scatter, cov, atol=1e-12)


def test_fat_weighted_moments_use_rank_of_data(rng):
    X = rng.standard_normal((10, 50))
    s = weighted_moments(X, np.ones(10))
    assert s.effective_df == 9
    assert np.allclose(s.scatter, np.cov(X, rowvar=False), atol=1e-12)


def test_mahalanobis_examples():
    s = weighted_moments(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
                         np.ones(4))
    # scatter is (2/3) I here
    assert mahalanobis_sq(s.location, s) == 0.0
    assert mahalanobis_sq(np.array([3.0, 4.0]), s) == pytest.approx(25.0 * 1.5)
    X = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
    X = X @ np.linalg.cholesky(np.array([[2.0, 1.0], [1.0, 2.0]])).T * np.sqrt(3.0 / 4.0)
    s = weighted_moments(X, np.ones(4))
    assert np.allclose(s.scatter, [[2.0, 1.0], [1.0, 2.0]])
    assert mahalanobis_sq(np.ones(2), s) == pytest.approx(2.0 / 3.0)


def test_mahalanobis_rank_zero():
    s = weighted_moments(np.ones((3, 2)), np.ones(3))
    with pytest.raises(SingularMatrix):
        mahalanobis_sq(np.zeros(2), s)


def test_outlyingness_rows_match_explicit_inverse(rng):
    X = rng.standard_normal((25, 4))
    s = weighted_moments(X, np.ones(25))
    mu, cov = weighted_mean_cov(X, np.ones(25))
    d = outlyingness_sq(X, s)
    assert np.allclose(d, [mahalanobis_explicit(x, mu, cov) for x in X], rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_affine_equivariance(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((20, 3))
    w = np.ones(20)
    w[:4] = 0.0
    A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    b = rng.standard_normal(3)
    s, t = weighted_moments(X, w), weighted_moments(X @ A.T + b, w)
    assert np.allclose(t.location, A @ s.location + b, rtol=1e-8, atol=1e-10)
    assert np.allclose(t.scatter, A @ s.scatter @ A.T, rtol=1e-8, atol=1e-10)
    x = rng.standard_normal(3) * 4
    assert outlyingness_sq(A @ x + b, t) == pytest.approx(outlyingness_sq(x, s), rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 30), st.integers(1, 40), st.integers(0, 10_000))
def test_scatter_is_psd(n, p, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    w = np.where(rng.uniform(size=n) < 0.8, 1.0, rng.uniform(size=n))
    if w.sum() <= 1.0:
        w[:] = 1.0
    s = weighted_moments(X, w)
    lam = np.linalg.eigvalsh(s.scatter)
    assert lam.min() >= -1e-8 * max(lam.max(), 1e-300)


def test_clean_bivariate_sample_keeps_most_weights(rng):
    # Monte-Carlo check: a single sample may dip below 45, the rate may not
    kept = []
    for _ in range(100):
        X = rng.standard_normal((50, 2)) @ np.array([[1.0, 0.0], [0.6, 0.8]])
        kept.append(detect_weights(X).n_w)
    kept = np.array(kept)
    assert np.mean(kept >= 45) >= 0.9
    assert 1.0 - kept.mean() / 50 <= 0.05


def test_toy_outlier_gets_weight_zero():
    for seed in range(10):
        Z, _ = standardize(toy_dataset(0, seed))
        assert detect_weights(Z.values).weights[50] == 0.0


def test_external_weights_pass_through():
    w = CaseWeights([1.0, 0.0, 1.0])
    assert detect_weights(np.zeros((3, 2)), external=w) is w
    with pytest.raises(InvalidInput):
        detect_weights(np.zeros((4, 2)), external=w)


def test_detector_is_permutation_equivariant(rng):
    X = rng.standard_normal((60, 3))
    X[:5] += 6.0
    perm = rng.permutation(60)
    w = detect_weights(X).weights
    assert np.array_equal(detect_weights(X[perm]).weights, w[perm])
    assert np.all(w[:5] == 0.0)


def test_fat_detector_flags_planted_outlier(rng):
    X = rng.standard_normal((40, 200))
    X[7] += 3.0
    assert detect_weights(X).weights[7] == 0.0


def test_concentration_steps_need_more_cases_than_variables():
    with pytest.raises(InvalidInput):
        concentration_steps(np.zeros((3, 3)))
