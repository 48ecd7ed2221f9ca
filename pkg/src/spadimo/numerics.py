"""Dense symmetric linear algebra and chi-squared quantiles."""

from dataclasses import dataclass
import math

import numpy as np
from scipy import linalg as sla
from scipy import special

from . import _kernels
from .errors import InvalidInput, SingularMatrix

FULL_RANK_TOL = 1e-10
FAT_DATA_RANK_TOL = 1e-6


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a symmetric matrix, eigenvalues in descending order.

    ``eigenvectors`` holds one orthonormal column per entry of
    ``eigenvalues``, except for matrices assembled from a Gram (dual) form,
    where only the first ``retained_rank`` columns are materialized.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    retained_rank: int

    @property
    def dim(self):
        return self.eigenvectors.shape[0]

    @property
    def retained_values(self):
        return self.eigenvalues[: self.retained_rank]

    @property
    def retained_vectors(self):
        return self.eigenvectors[:, : self.retained_rank]

    def reconstruct(self):
        k = min(self.eigenvectors.shape[1], len(self.eigenvalues))
        V = self.eigenvectors[:, :k]
        return (V * self.eigenvalues[:k]) @ V.T


def as_symmetric(S, name="matrix"):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise InvalidInput(f"{name} must be a non-empty square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InvalidInput(f"{name} has non-finite entries")
    scale = max(1.0, float(np.abs(S).max()))
    if np.abs(S - S.T).max() > 1e-10 * scale:
        raise InvalidInput(f"{name} is not symmetric")
    return 0.5 * (S + S.T)


def retained_rank(eigenvalues, rank_tolerance):
    """Number of eigenvalues exceeding ``rank_tolerance`` times the largest."""
    if len(eigenvalues) == 0 or eigenvalues[0] <= 0.0:
        return 0
    return int(np.count_nonzero(eigenvalues > rank_tolerance * eigenvalues[0]))


def sym_eigen(S, rank_tolerance=FULL_RANK_TOL):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``1e-12 * ||S||_F``.
    """
    if not 0.0 < rank_tolerance < 1.0:
        raise InvalidInput("rank_tolerance must lie in (0, 1)")
    S = as_symmetric(S)
    values, vectors, _ = _kernels.jacobi_eigh(S)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = np.ascontiguousarray(vectors[:, order])
    return SpectralDecomposition(values, vectors, retained_rank(values, rank_tolerance))


def gram_eigen(B, rank_tolerance=FULL_RANK_TOL):
    """Spectral form of ``B.T @ B`` computed through whichever Gram side is smaller.

    For ``n < p`` the n-by-n matrix ``B @ B.T`` is decomposed and its
    eigenvectors are mapped back, so p-dimensional factors cost O(n^2 p).
    Only the retained eigenvectors are materialized in that case.
    """
    B = np.asarray(B, dtype=float)
    n, p = B.shape
    if p <= n:
        return sym_eigen(B.T @ B, rank_tolerance)
    dual = sym_eigen(B @ B.T, rank_tolerance)
    r = dual.retained_rank
    vectors = B.T @ dual.eigenvectors[:, :r]
    if r:
        vectors /= np.sqrt(dual.eigenvalues[:r])
        # one Gram-Schmidt pass restores orthonormality lost to rounding
        vectors, _ = np.linalg.qr(vectors)
        vectors *= np.sign(np.sum(vectors * (B.T @ dual.eigenvectors[:, :r]), axis=0))
    return SpectralDecomposition(dual.eigenvalues, vectors, r)


def cholesky_lower(S):
    """Lower Cholesky factor L with L @ L.T == S."""
    S = as_symmetric(S)
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("matrix is not positive definite") from exc
    if not np.all(np.diag(L) > 0.0):
        raise SingularMatrix("matrix is not positive definite")
    return L


def solve_spd(S, b):
    """Solve ``S v = b`` for symmetric positive-definite S."""
    S = as_symmetric(S)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != S.shape[0]:
        raise InvalidInput("right-hand side length does not match matrix")
    try:
        factor = sla.cho_factor(S, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise SingularMatrix("matrix is singular or indefinite") from exc
    diag = np.diag(factor[0]) ** 2
    # squared Cholesky pivots bracket the spectrum; reject near-singular systems
    if diag.min() <= 1e-12 * max(diag.max(), np.abs(np.diag(S)).max()):
        raise SingularMatrix("matrix is numerically singular")
    return sla.cho_solve(factor, b, check_finite=False)


def _chi2_cdf(q, df):
    return special.gammainc(0.5 * df, 0.5 * q)


def _chi2_pdf(q, df):
    a = 0.5 * df
    if q <= 0.0:
        return 0.0
    return 0.5 * math.exp((a - 1.0) * math.log(0.5 * q) - 0.5 * q - special.gammaln(a))


def chi2_quantile(prob, df):
    """Quantile of the chi-squared distribution.

    Newton iterations on the regularized lower incomplete gamma function,
    falling back to bisection whenever a step leaves the bracketing interval.
    """
    prob = float(prob)
    if not 0.0 < prob < 1.0 or math.isnan(prob):
        raise InvalidInput(f"prob must lie in (0, 1), got {prob}")
    if int(df) != df or df < 1:
        raise InvalidInput(f"df must be a positive integer, got {df}")
    df = int(df)

    lo, hi = 0.0, max(1.0, 2.0 * df)
    while _chi2_cdf(hi, df) < prob:
        lo, hi = hi, 2.0 * hi
    # Wilson-Hilferty only seeds the iteration
    z = special.ndtri(prob)
    c = 2.0 / (9.0 * df)
    q = df * max(1.0 - c + z * math.sqrt(c), 1e-3) ** 3
    if not lo < q < hi:
        q = 0.5 * (lo + hi)

    for _ in range(200):
        f = _chi2_cdf(q, df) - prob
        if f == 0.0:
            return q
        if f < 0.0:
            lo = q
        else:
            hi = q
        dens = _chi2_pdf(q, df)
        step_ok = False
        if dens > 0.0:
            cand = q - f / dens
            if lo < cand < hi:
                step_ok = True
        q_new = cand if step_ok else 0.5 * (lo + hi)
        if abs(q_new - q) <= 4e-16 * abs(q) or hi - lo <= 4e-16 * hi:
            return q_new
        q = q_new
    return q
