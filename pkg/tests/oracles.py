"""Reference computations that share no code with the package.

Each one takes a different route to the same quantity: enumeration instead
of selection, series plus bisection instead of Newton on a library special
function, explicit inverses instead of spectral solves, and so on.
"""

import itertools
import math

import numpy as np

# published small-sample factors, typed in again rather than imported
QN_FACTORS = {2: 0.399, 3: 0.994, 4: 0.512, 5: 0.844, 6: 0.611, 7: 0.857, 8: 0.669, 9: 0.872}


def qn_brute(x):
    x = list(map(float, x))
    n = len(x)
    gaps = sorted(abs(a - b) for a, b in itertools.combinations(x, 2))
    h = n // 2 + 1
    k = h * (h - 1) // 2
    if n <= 9:
        factor = QN_FACTORS[n]
    elif n % 2:
        factor = n / (n + 1.4)
    else:
        factor = n / (n + 3.8)
    return 2.2219 * factor * gaps[k - 1]


def lower_gamma_regularized(a, x):
    """P(a, x) by its power series; fine for the moderate arguments used here."""
    if x <= 0.0:
        return 0.0
    term = 1.0 / a
    total = term
    k = 0
    while True:
        k += 1
        term *= x / (a + k)
        total += term
        if term < total * 1e-17:
            break
        if k > 100000:
            raise RuntimeError("series did not converge")
    return total * math.exp(a * math.log(x) - x - math.lgamma(a))


def chi2_quantile_bisect(prob, df):
    lo, hi = 0.0, 1.0
    while lower_gamma_regularized(df / 2, hi / 2) < prob:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lower_gamma_regularized(df / 2, mid / 2) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def cubic_eigenvalues(S):
    """Eigenvalues of a symmetric 3x3 matrix from its characteristic polynomial.

    Trigonometric solution of the depressed cubic; returns them descending.
    """
    S = np.asarray(S, dtype=float)
    c2 = -np.trace(S)
    c1 = (S[0, 0] * S[1, 1] + S[0, 0] * S[2, 2] + S[1, 1] * S[2, 2]
          - S[0, 1] ** 2 - S[0, 2] ** 2 - S[1, 2] ** 2)
    c0 = -np.linalg.det(S)
    # lambda = t - c2/3 turns l^3 + c2 l^2 + c1 l + c0 into t^3 + pt + q
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    r = 2.0 * math.sqrt(-p / 3.0)
    arg = max(-1.0, min(1.0, 3.0 * q / (p * r)))
    phi = math.acos(arg) / 3.0
    roots = [r * math.cos(phi - 2.0 * math.pi * k / 3.0) - c2 / 3.0 for k in range(3)]
    return sorted(roots, reverse=True)


def a09_entries(p):
    return [[(-0.9) ** abs(j - k) for k in range(p)] for j in range(p)]


def weighted_mean_cov(X, w):
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    nw = w.sum()
    mu = (w[:, None] * X).sum(axis=0) / nw
    C = X - mu
    cov = sum(w[i] * np.outer(C[i], C[i]) for i in range(len(X))) / (nw - 1.0)
    return mu, cov


def mahalanobis_explicit(x, mu, cov):
    d = np.asarray(x, dtype=float) - mu
    return float(d @ np.linalg.inv(cov) @ d)


def projection_ratio(x, mu, cov, a):
    return abs(a @ (x - mu)) / math.sqrt(a @ cov @ a)


def theta_closed_form(X, w, x, eps):
    """sqrt(eps)/(n_we - 1) * inv(Sigma_we) (x - mu_we) with x appended at weight eps."""
    Xa = np.vstack([X, x])
    wa = np.append(w, eps)
    mu, cov = weighted_mean_cov(Xa, wa)
    nwe = wa.sum()
    return math.sqrt(eps) / (nwe - 1.0) * np.linalg.inv(cov) @ (x - mu)


def pls1_one_component(X, y):
    w = X.T @ y
    w = w / np.linalg.norm(w)
    t = X @ w
    return w * (t @ y) / (t @ t)


def ols(X, y):
    return np.linalg.lstsq(X, y, rcond=None)[0]
