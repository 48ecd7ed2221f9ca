"""Direction of maximal outlyingness and its least-squares reformulation.

The closed form and the epsilon-augmented regression are independent
routes to the same unit vector, and the test suite uses each as the
other's oracle.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidInput, ZeroDirection
from .numerics import solve_spd
from .robust import CaseWeights


@dataclass(frozen=True)
class AugmentedRegression:
    design: np.ndarray
    response: np.ndarray
    epsilon: float
    center: np.ndarray
    n_w_eps: float


def unit_direction(v, reference):
    """Normalize v, oriented so that it points from the center towards the case."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not norm > 0.0 or not np.isfinite(norm):
        raise ZeroDirection("direction vector is zero")
    a = v / norm
    if a @ reference < 0.0:
        a = -a
    return a


def max_outlying_direction(x, summary):
    """Unit vector maximizing |x'a - mu'a| / sqrt(a' Sigma a): Sigma^-1 (x - mu), normed.

    The inverse acts on the retained eigen-space of the summary's scatter.
    """
    d = np.asarray(x, dtype=float) - summary.location
    if not np.any(d):
        raise ZeroDirection("case coincides with the weighted center")
    V = summary.spectral.retained_vectors
    coef = (d @ V) / summary.spectral.retained_values
    return unit_direction(V @ coef, d)


def projected_outlyingness(x, summary, directions):
    """|x'a - mu'a| / sqrt(a' Sigma a) for each row a of ``directions``."""
    A = np.atleast_2d(np.asarray(directions, dtype=float))
    d = np.asarray(x, dtype=float) - summary.location
    V = summary.spectral.retained_vectors
    proj = A @ V
    spread = np.sum(proj * proj * summary.spectral.retained_values, axis=1)
    return np.abs(A @ d) / np.sqrt(spread)


def build_augmented_regression(X, w, x, epsilon):
    """Weighted, centered design with the extra row sqrt(eps) (x - mu_eps)'.

    The response is the (n+1)-th basis vector.
    """
    if not epsilon > 0.0:
        raise InvalidInput("epsilon must be positive")
    X = np.asarray(X, dtype=float)
    weights = w.weights if isinstance(w, CaseWeights) else np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    n = X.shape[0]
    if len(weights) != n or x.shape != (X.shape[1],):
        raise InvalidInput("inconsistent shapes for augmented regression")
    n_w_eps = float(weights.sum()) + epsilon
    center = (weights @ X + epsilon * x) / n_w_eps
    design = np.vstack([
        np.sqrt(weights)[:, None] * (X - center),
        math.sqrt(epsilon) * (x - center)[None, :],
    ])
    response = np.zeros(n + 1)
    response[n] = 1.0
    return AugmentedRegression(design, response, float(epsilon), center, n_w_eps)


def least_squares_direction(design, response, reference):
    """Normed least-squares coefficients via the normal equations."""
    theta = solve_spd(design.T @ design, design.T @ response)
    return unit_direction(theta, reference), theta


def regression_direction(X, w, x, epsilon):
    """Direction of maximal outlyingness from the epsilon-augmented regression."""
    reg = build_augmented_regression(X, w, x, epsilon)
    a, _ = least_squares_direction(reg.design, reg.response, np.asarray(x) - reg.center)
    return a


def case_regression_direction(X, w, i, eps_weight=1e-4):
    """Regression route for a case inside the sample.

    A zero weight on case i is replaced by ``eps_weight``; the response is
    the i-th basis vector.
    """
    X = np.asarray(X, dtype=float)
    weights = np.array(w.weights if isinstance(w, CaseWeights) else w, dtype=float)
    if weights[i] == 0.0:
        weights[i] = eps_weight
    n_w = weights.sum()
    center = weights @ X / n_w
    design = np.sqrt(weights)[:, None] * (X - center)
    response = np.zeros(X.shape[0])
    response[i] = 1.0
    a, _ = least_squares_direction(design, response, X[i] - center)
    return a
