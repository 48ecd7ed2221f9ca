"""Robust standardization, case weights, weighted moments and outlyingness."""

from dataclasses import dataclass
from functools import cached_property
from statistics import NormalDist
import math

import numpy as np

from . import _kernels
from .errors import DegenerateColumn, DegenerateWeights, InvalidInput, SingularMatrix
from .numerics import (
    FAT_DATA_RANK_TOL,
    FULL_RANK_TOL,
    SpectralDecomposition,
    chi2_quantile,
    gram_eigen,
    sym_eigen,
)

QN_CONSISTENCY = 2.2219
# small-sample correction factors for n = 2..9
_QN_SMALL_N = {2: 0.399, 3: 0.994, 4: 0.512, 5: 0.844, 6: 0.611, 7: 0.857, 8: 0.669, 9: 0.872}

MAX_CSTEPS = 50
MAX_SCORE_COMPONENTS = 10
# concentration steps need roughly this many cases per score dimension
CASES_PER_SCORE = 20
SCORE_VARIANCE_TARGET = 0.8


@dataclass(frozen=True)
class DataMatrix:
    """An n x p observation matrix with optional column labels."""

    values: np.ndarray
    column_names: tuple = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidInput("data must be two-dimensional")
        n, p = values.shape
        if n < 2 or p < 1:
            raise InvalidInput(f"need n >= 2 and p >= 1, got {n} x {p}")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("data contains non-finite entries")
        object.__setattr__(self, "values", values)
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != p:
                raise InvalidInput("column_names length does not match p")
            object.__setattr__(self, "column_names", names)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def names(self):
        """Column labels, falling back to 1-based indices."""
        if self.column_names is not None:
            return list(self.column_names)
        return [str(j + 1) for j in range(self.p)]


@dataclass(frozen=True)
class CaseWeights:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise InvalidInput("weights must be a vector")
        if np.any(~np.isfinite(w)) or np.any(w < 0.0) or np.any(w > 1.0):
            raise InvalidInput("weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)
        if self.n_w <= 1.0:
            raise DegenerateWeights(f"sum of weights {self.n_w:.6g} must exceed 1")

    @property
    def n_w(self):
        return float(self.weights.sum())

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class StandardizationParams:
    centers: np.ndarray
    scales: np.ndarray

    def apply(self, X):
        return (np.asarray(X, dtype=float) - self.centers) / self.scales

    def invert(self, Z):
        return np.asarray(Z, dtype=float) * self.scales + self.centers


@dataclass(frozen=True, eq=False)
class RobustSummary:
    """Weighted location and scatter, the latter held in spectral form.

    ``effective_df`` is the retained rank, used as degrees of freedom in
    every chi-squared comparison. The dense scatter matrix is only built on
    request.
    """

    location: np.ndarray
    spectral: SpectralDecomposition
    n_w: float

    @property
    def p(self):
        return len(self.location)

    @property
    def effective_df(self):
        return self.spectral.retained_rank

    @cached_property
    def scatter(self):
        return self.spectral.reconstruct()


def _data(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidInput("data must be two-dimensional")
    if not np.all(np.isfinite(X)):
        raise InvalidInput("data contains non-finite entries")
    return X


def qn_correction(n):
    if n <= 9:
        return _QN_SMALL_N[n]
    return n / (n + 1.4) if n % 2 else n / (n + 3.8)


def qn_raw(x):
    """The k-th smallest pairwise gap, k = C(floor(n/2) + 1, 2), without constants."""
    y = np.sort(np.asarray(x, dtype=float))
    n = len(y)
    h = n // 2 + 1
    return _kernels.qn_order_statistic(y, h * (h - 1) // 2)


def qn_scale(x):
    """Rousseeuw-Croux Qn scale, consistent for the normal standard deviation."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise InvalidInput("qn_scale needs a vector of length >= 2")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("qn_scale input has non-finite entries")
    return QN_CONSISTENCY * qn_correction(len(x)) * qn_raw(x)


def standardize(X):
    """Center columns by their median and scale by their Qn.

    Returns ``(Z, params)``; Z keeps the container type of X.
    """
    values = _data(X)
    centers = np.median(values, axis=0)
    scales = np.array([qn_scale(values[:, j]) for j in range(values.shape[1])])
    for j, s in enumerate(scales):
        if not s > 0.0:
            raise DegenerateColumn(j)
    params = StandardizationParams(centers, scales)
    Z = params.apply(values)
    if isinstance(X, DataMatrix):
        Z = DataMatrix(Z, X.column_names)
    return Z, params


def weighted_moments(X, w):
    """Weighted mean and covariance (divisor n_w - 1) in spectral form.

    The eigen-space is found through the smaller Gram side, so fat data
    (p >= n_w) costs O(n^2 p). The rank tolerance follows the data shape.
    """
    X = _data(X)
    if not isinstance(w, CaseWeights):
        w = CaseWeights(w)
    if len(w) != X.shape[0]:
        raise InvalidInput("weights length does not match number of cases")
    weights, n_w = w.weights, w.n_w
    location = weights @ X / n_w
    B = np.sqrt(weights)[:, None] * (X - location) / math.sqrt(n_w - 1.0)
    keep = weights > 0.0
    tol = FAT_DATA_RANK_TOL if X.shape[1] >= n_w else FULL_RANK_TOL
    spectral = gram_eigen(B[keep], tol)
    return RobustSummary(location, spectral, n_w)


def mahalanobis_sq(x, summary):
    """Squared distance of x (a vector or rows of a matrix) under a summary.

    Computed in the retained eigen-space: sum_k (v_k' (x - mu))^2 / lambda_k.
    """
    r = summary.spectral.retained_rank
    if r == 0:
        raise SingularMatrix("scatter has no retained eigen-directions")
    x = np.asarray(x, dtype=float)
    proj = (x - summary.location) @ summary.spectral.retained_vectors
    return np.sum(proj * proj / summary.spectral.retained_values, axis=-1)


def outlyingness_sq(x, summary):
    """Squared outlyingness o(x)^2; compare against chi2 with ``summary.effective_df``."""
    return mahalanobis_sq(x, summary)


def _moments(X):
    mu = X.mean(axis=0)
    C = X - mu
    return mu, C.T @ C / (len(X) - 1)


def _distances(X, mu, cov):
    """Squared Mahalanobis distances of the rows of X via the spectral inverse."""
    sd = sym_eigen(cov)
    if sd.retained_rank < len(mu):
        raise SingularMatrix("subset covariance is singular")
    proj = (X - mu) @ sd.eigenvectors
    return np.sum(proj * proj / sd.eigenvalues, axis=1)


def concentration_steps(X):
    """Deterministic concentration-step location/scatter and squared distances.

    Starts from the coordinatewise median and diagonal Qn^2 scatter, then
    alternates between keeping the h = ceil((n + p + 1) / 2) closest cases
    and refitting on them, until the subset repeats. The raw scatter is
    rescaled so the median distance matches the chi2_p median.
    """
    X = _data(X)
    n, p = X.shape
    if n <= p:
        raise InvalidInput(f"concentration steps need n > p, got {n} x {p}")
    h = min(n, math.ceil((n + p + 1) / 2))
    mu = np.median(X, axis=0)
    scales = np.array([qn_scale(X[:, j]) for j in range(p)])
    if np.any(scales <= 0.0):
        scales = np.where(scales > 0.0, scales, X.std(axis=0, ddof=1))
    if np.any(scales <= 0.0):
        raise SingularMatrix("constant column in detector input")
    d2 = np.sum(((X - mu) / scales) ** 2, axis=1)
    subset = None
    for _ in range(MAX_CSTEPS):
        new = np.sort(np.argsort(d2, kind="stable")[:h])
        if subset is not None and np.array_equal(new, subset):
            break
        subset = new
        mu, cov = _moments(X[subset])
        d2 = _distances(X, mu, cov)
    factor = np.median(d2) / chi2_quantile(0.5, p)
    return mu, cov * factor, d2 / factor


def reweighted_steps(X, alpha=0.975):
    """Concentration steps followed by one reweighting pass.

    Cases within the chi2 cutoff of the raw fit are pooled into a classical
    mean and covariance, again rescaled to the chi2_p median.
    """
    _, _, d2 = concentration_steps(X)
    p = X.shape[1]
    keep = d2 <= chi2_quantile(alpha, p)
    if keep.sum() <= p:
        raise SingularMatrix("too few cases survive the raw fit")
    mu, cov = _moments(X[keep])
    d2 = _distances(X, mu, cov)
    factor = np.median(d2) / chi2_quantile(0.5, p)
    return mu, cov * factor, d2 / factor


def _score_route(X, alpha):
    """Case flags for data with too few cases per variable.

    Classical principal axes around the coordinatewise median; concentration
    steps on the leading k scores give score distances, and the residual
    off the k-dimensional subspace gives orthogonal distances, whose cutoff
    uses the normal approximation to OD^(2/3).
    """
    n, p = X.shape
    centered = X - np.median(X, axis=0)
    sd = gram_eigen(centered, FULL_RANK_TOL)
    r = sd.retained_rank
    if r == 0:
        raise DegenerateWeights("data has no spread")
    share = np.cumsum(sd.retained_values) / sd.retained_values.sum()
    k = int(np.searchsorted(share, SCORE_VARIANCE_TARGET) + 1)
    k = max(1, min(k, r, MAX_SCORE_COMPONENTS, n // CASES_PER_SCORE))
    V = sd.eigenvectors[:, :k]
    scores = centered @ V
    _, _, sd2 = reweighted_steps(scores, alpha)
    keep = sd2 <= chi2_quantile(alpha, k)
    resid = centered - scores @ V.T
    od = np.sqrt(np.sum(resid * resid, axis=1))
    if od.max() > 1e-12 * max(1.0, np.abs(centered).max()):
        t = od ** (2.0 / 3.0)
        med = np.median(t)
        mad = 1.4826 * np.median(np.abs(t - med))
        cutoff = (med + mad * NormalDist().inv_cdf(alpha)) ** 1.5
        keep &= od <= cutoff
    return keep


def uses_full_space(n, p):
    """Concentration steps run on the raw variables only when n >= 5p."""
    return n >= 5 * p


def detect_weights(Z, alpha=0.975, external=None):
    """0/1 case weights from a robust detector, or validated external weights.

    Cases whose robust squared distance exceeds ``chi2_quantile(alpha, p)``
    get weight 0. With n >= 5p the distances come from concentration steps on
    the variables themselves; otherwise a principal-axes route is used.
    """
    if external is not None:
        w = external if isinstance(external, CaseWeights) else CaseWeights(external)
        if len(w) != np.asarray(Z).shape[0]:
            raise InvalidInput("external weights length does not match number of cases")
        return w
    if not 0.5 < alpha < 1.0:
        raise InvalidInput("alpha must lie in (0.5, 1)")
    X = _data(Z)
    n, p = X.shape
    if uses_full_space(n, p):
        _, _, d2 = reweighted_steps(X, alpha)
        keep = d2 <= chi2_quantile(alpha, p)
    else:
        keep = _score_route(X, alpha)
    return CaseWeights(keep.astype(float))
