"""The eta-grid scan that explains why a case is outlying.

For each sparsity level, from sparse to dense, a one-component SNIPLS fit
of the case indicator on the weighted, centered data picks the variables
that push the case out. Those columns are dropped and the reduced case is
re-tested; the scan stops once it is no longer outlying.
"""

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from .errors import (
    DegenerateComponent,
    EmptySelection,
    InvalidInput,
    NotOutlying,
    ZeroCovariance,
)
from .numerics import chi2_quantile
from .robust import CaseWeights, detect_weights, outlyingness_sq, weighted_moments
from .snipls import snipls_fit

_FIT_ERRORS = (EmptySelection, ZeroCovariance, DegenerateComponent)


class Termination(str, Enum):
    CONVERGED = "converged"
    GRID_EXHAUSTED = "grid_exhausted"


@dataclass(frozen=True)
class SpadimoConfig:
    grid_low: float = 0.1
    grid_high: float = 0.9
    grid_step: float = 0.05
    alpha: float = 0.975
    h: int = 1
    epsilon_weight: float = 1e-4
    refit_weights: bool = True
    detect_alpha: float = 0.975

    def __post_init__(self):
        if not 0.0 <= self.grid_low < self.grid_high < 1.0:
            raise InvalidInput("grid must satisfy 0 <= low < high < 1")
        if not self.grid_step > 0.0:
            raise InvalidInput("grid_step must be positive")
        for name in ("alpha", "detect_alpha"):
            if not 0.5 < getattr(self, name) < 1.0:
                raise InvalidInput(f"{name} must lie in (0.5, 1)")
        if self.h < 1 or int(self.h) != self.h:
            raise InvalidInput("h must be a positive integer")
        if not self.epsilon_weight > 0.0:
            raise InvalidInput("epsilon_weight must be positive")

    def grid(self):
        """Sparsity values from grid_high down to grid_low."""
        count = int(math.floor((self.grid_high - self.grid_low) / self.grid_step + 1e-9)) + 1
        return [round(self.grid_high - k * self.grid_step, 12) for k in range(count)]


def default_grid(n, p):
    """Recommended scan: start at 0.9 when n >> p (n >= 5p), else at 0.6."""
    if n < 1 or p < 1:
        raise InvalidInput("n and p must be positive")
    high = 0.9 if n >= 5 * p else 0.6
    return SpadimoConfig(grid_low=0.1, grid_high=high, grid_step=0.05, alpha=0.975, h=1)


@dataclass(frozen=True)
class FlaggedVariable:
    column: int
    sign: int
    coefficient: float
    eta: float


@dataclass(frozen=True)
class TraceEntry:
    eta: float
    remaining: int
    df: int = 0
    outlyingness_sq: float = None
    cutoff: float = None
    new_flags: tuple = ()
    note: str = ""


@dataclass
class SpadimoReport:
    case_index: int
    flagged: list
    selected_eta: float
    trace: list
    terminated: Termination
    initial_outlyingness_sq: float = None

    @property
    def flagged_columns(self):
        return [f.column for f in self.flagged]


@dataclass
class SparseDirectionPath:
    etas: list
    directions: np.ndarray  # one row per eta
    counts: list
    errors: dict = field(default_factory=dict)


def regression_weights(w, i, epsilon_weight):
    """Case weights for the regression, with a zero weight on case i lifted to epsilon."""
    weights = np.array(w.weights if isinstance(w, CaseWeights) else w, dtype=float)
    if weights[i] == 0.0:
        weights[i] = epsilon_weight
    return weights


def weighted_design(Z, weights):
    center = weights @ Z / weights.sum()
    return np.sqrt(weights)[:, None] * (Z - center)


def _indicator(n, i):
    y = np.zeros(n)
    y[i] = 1.0
    return y


def case_outlyingness(Z, w, i, alpha):
    """(o^2, df, cutoff) for case i under the weighted moments of Z."""
    summary = weighted_moments(Z, w)
    o2 = float(outlyingness_sq(Z[i], summary))
    df = summary.effective_df
    return o2, int(df), float(chi2_quantile(alpha, df))


def spadimo_explain(Z, w, i, cfg=None):
    """Flag the variables that make case i of standardized data Z outlying.

    Columns flagged at one sparsity level are removed before the next; the
    scan ends once the reduced case's squared outlyingness falls below the
    chi2 cutoff with the reduced effective degrees of freedom.
    """
    Z = np.asarray(Z, dtype=float)
    n, p = Z.shape
    if not 0 <= i < n:
        raise InvalidInput(f"case index {i} out of range")
    if cfg is None:
        cfg = default_grid(n, p)
    w = w if isinstance(w, CaseWeights) else CaseWeights(w)

    initial, df, cutoff = case_outlyingness(Z, w, i, cfg.alpha)
    if w.weights[i] > 0.0 and initial < cutoff:
        raise NotOutlying(i, initial, cutoff)

    reg_w = regression_weights(w, i, cfg.epsilon_weight)
    y = _indicator(n, i)
    remaining = np.arange(p)
    flagged, trace = [], []
    for eta in cfg.grid():
        try:
            model = snipls_fit(weighted_design(Z[:, remaining], reg_w), y, cfg.h, eta)
        except _FIT_ERRORS as exc:
            trace.append(TraceEntry(eta, len(remaining), note=f"fit skipped: {exc}"))
            continue
        sel = model.selected
        new = []
        for j in sel:
            coef = float(model.coefficients[j])
            col = int(remaining[j])
            flagged.append(FlaggedVariable(col, 1 if coef > 0 else -1, coef, eta))
            new.append(col)
        remaining = np.delete(remaining, sel)
        if len(remaining) == 0:
            trace.append(TraceEntry(eta, 0, new_flags=tuple(new), note="all columns removed"))
            break
        Zr = Z[:, remaining]
        weights = detect_weights(Zr, cfg.detect_alpha) if cfg.refit_weights else w
        o2, df, cutoff = case_outlyingness(Zr, weights, i, cfg.alpha)
        trace.append(TraceEntry(eta, len(remaining), df, o2, cutoff, tuple(new)))
        if o2 < cutoff:
            return SpadimoReport(i, flagged, eta, trace, Termination.CONVERGED, initial)
    return SpadimoReport(i, flagged, None, trace, Termination.GRID_EXHAUSTED, initial)


def direction_path(Z, w, i, grid, h=1, epsilon_weight=1e-4):
    """Normalized sparse directions of case i on the full data, one per eta.

    Each eta is fitted independently (no column removal); failed fits give a
    zero row and are listed in ``errors``.
    """
    Z = np.asarray(Z, dtype=float)
    n, p = Z.shape
    reg_w = regression_weights(w, i, epsilon_weight)
    X = weighted_design(Z, reg_w)
    y = _indicator(n, i)
    etas = [float(e) for e in grid]
    directions = np.zeros((len(etas), p))
    counts, errors = [], {}
    for k, eta in enumerate(etas):
        try:
            coef = snipls_fit(X, y, h, eta).coefficients
        except _FIT_ERRORS as exc:
            errors[eta] = str(exc)
            counts.append(0)
            continue
        directions[k] = coef / np.linalg.norm(coef)
        counts.append(int(np.count_nonzero(coef)))
    return SparseDirectionPath(etas, directions, counts, errors)
