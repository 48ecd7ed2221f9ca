"""Synthetic data, cellwise contamination and recovery metrics."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import math
import os

import numpy as np

from .errors import InvalidInput, SpadimoError
from .explain import SpadimoConfig, Termination, default_grid, spadimo_explain
from .numerics import cholesky_lower
from .robust import DataMatrix, detect_weights, standardize

TOY_CORRELATION = 0.7


class Correlation(str, Enum):
    A09 = "a09"
    RANDOM = "random"


def a09_correlation(p):
    """Correlation matrix with entries (-0.9)^|j - h|."""
    if p < 1:
        raise InvalidInput("p must be positive")
    lag = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return (-0.9) ** lag


def random_correlation(p, seed):
    """Rescaled G G' + 0.1 I with standard normal G; modest correlations."""
    if p < 1:
        raise InvalidInput("p must be positive")
    G = np.random.default_rng(seed).standard_normal((p, p))
    S = G @ G.T + 0.1 * np.eye(p)
    d = 1.0 / np.sqrt(np.diag(S))
    R = S * np.outer(d, d)
    np.fill_diagonal(R, 1.0)
    return R


def gen_dataset(n, p, corr, seed):
    """n rows drawn i.i.d. from N(0, corr)."""
    corr = np.asarray(corr, dtype=float)
    if corr.shape != (p, p):
        raise InvalidInput("correlation shape does not match p")
    L = cholesky_lower(corr)
    E = np.random.default_rng(seed).standard_normal((n, p))
    return DataMatrix(E @ L.T)


def contaminated_count(p, fraction):
    return math.ceil(fraction * p - 1e-12)


def contaminate(X, i, fraction, gamma, seed):
    """Set ceil(fraction * p) random cells of row i to gamma.

    Returns the new matrix and the sorted contaminated columns.
    """
    values = np.array(X, dtype=float, copy=True)
    p = values.shape[1]
    k = contaminated_count(p, fraction)
    if not 1 <= k <= p:
        raise InvalidInput(f"fraction {fraction} contaminates {k} of {p} columns")
    cols = np.sort(np.random.default_rng(seed).choice(p, size=k, replace=False))
    values[i, cols] = gamma
    names = X.column_names if isinstance(X, DataMatrix) else None
    return DataMatrix(values, names), set(int(c) for c in cols)


def toy_dataset(seed, noise_seed=None, n_clean=50, n_noise=28, rho=TOY_CORRELATION):
    """Correlated bivariate normal points, one outlier at (10, 0), plus noise columns.

    The outlier is the last row. The noise columns come from ``noise_seed``
    when given, so the bivariate part can stay fixed while the noise varies.
    """
    rng = np.random.default_rng(seed)
    L = cholesky_lower(np.array([[1.0, rho], [rho, 1.0]]))
    pair = rng.standard_normal((n_clean, 2)) @ L.T
    pair = np.vstack([pair, [10.0, 0.0]])
    noise_rng = rng if noise_seed is None else np.random.default_rng([seed, noise_seed])
    noise = noise_rng.standard_normal((n_clean + 1, n_noise))
    return DataMatrix(np.hstack([pair, noise]))


@dataclass(frozen=True)
class ReplicationRecord:
    index: int
    case: int
    truth: tuple
    flagged: tuple
    flagged_count: int
    detected_pct: float
    swamped_pct: float
    eta: float
    terminated: str
    failure: str = ""


def evaluate(flagged, truth, p):
    """(flagged_count, detected %, swamped %) for a set of flagged columns."""
    flagged, truth = set(flagged), set(truth)
    hits = len(flagged & truth)
    false = len(flagged - truth)
    detected = 100.0 * hits / len(truth) if truth else 0.0
    clean = p - len(truth)
    swamped = 100.0 * false / clean if clean else 0.0
    return len(flagged), detected, swamped


@dataclass(frozen=True)
class SimConfig:
    n: int
    p: int
    correlation: Correlation = Correlation.A09
    contamination_fraction: float = 0.05
    gamma: float = 4.0
    replications: int = 50
    seed: int = 0
    spadimo: SpadimoConfig = None
    correlation_seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "correlation", Correlation(self.correlation))
        except ValueError:
            raise InvalidInput(f"unknown correlation {self.correlation!r}") from None
        if self.n < 2 or self.p < 1:
            raise InvalidInput("need n >= 2 and p >= 1")
        if not 0.0 < self.contamination_fraction < 1.0:
            raise InvalidInput("contamination fraction must lie in (0, 1)")
        if not 1 <= contaminated_count(self.p, self.contamination_fraction) <= self.p:
            raise InvalidInput("contamination fraction selects no columns")
        if self.replications < 1:
            raise InvalidInput("replications must be at least 1")
        if self.spadimo is None:
            object.__setattr__(self, "spadimo", default_grid(self.n, self.p))

    def correlation_matrix(self):
        if self.correlation is Correlation.A09:
            return a09_correlation(self.p)
        return random_correlation(self.p, self.correlation_seed)


@dataclass
class SimMetrics:
    flagged_count: float
    detected_pct: float
    swamped_pct: float
    mean_eta: float
    records: list = field(default_factory=list)

    @property
    def failures(self):
        return sum(1 for r in self.records if r.failure)


def run_replication(cfg, index, seed_seq, corr_factor=None):
    data_seed, case_seed, cell_seed = seed_seq.spawn(3)
    L = corr_factor if corr_factor is not None else cholesky_lower(cfg.correlation_matrix())
    E = np.random.default_rng(data_seed).standard_normal((cfg.n, cfg.p))
    X = DataMatrix(E @ L.T)
    case = int(np.random.default_rng(case_seed).integers(cfg.n))
    X, truth = contaminate(X, case, cfg.contamination_fraction, cfg.gamma, cell_seed)
    truth_t = tuple(sorted(truth))
    try:
        Z, _ = standardize(X)
        w = detect_weights(Z.values)
        report = spadimo_explain(Z.values, w, case, cfg.spadimo)
    except SpadimoError as exc:
        return ReplicationRecord(index, case, truth_t, (), 0, 0.0, 0.0, float("nan"),
                                 "failed", f"{type(exc).__name__}: {exc}")
    flagged = tuple(report.flagged_columns)
    count, det, swa = evaluate(flagged, truth, cfg.p)
    eta = report.selected_eta if report.selected_eta is not None else float("nan")
    return ReplicationRecord(index, case, truth_t, flagged, count, det, swa, eta,
                             report.terminated.value)


def thread_count(tasks):
    cap = int(os.environ.get("SPADIMO_THREADS", "0") or 0)
    if cap <= 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, tasks))


def aggregate(records):
    records = sorted(records, key=lambda r: r.index)
    m = len(records)
    etas = [r.eta for r in records if r.terminated == Termination.CONVERGED.value]
    return SimMetrics(
        flagged_count=sum(r.flagged_count for r in records) / m,
        detected_pct=sum(r.detected_pct for r in records) / m,
        swamped_pct=sum(r.swamped_pct for r in records) / m,
        mean_eta=sum(etas) / len(etas) if etas else float("nan"),
        records=records,
    )


def run_study(cfg):
    """Run all replications of one simulation cell and average the metrics.

    Each replication draws from its own spawned seed stream, so results do
    not depend on scheduling. Failed replications count as zero detection.
    """
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    L = cholesky_lower(cfg.correlation_matrix())
    workers = thread_count(cfg.replications)
    if workers == 1:
        records = [run_replication(cfg, k, s, L) for k, s in enumerate(seeds)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(lambda ks: run_replication(cfg, ks[0], ks[1], L),
                                    enumerate(seeds)))
    return aggregate(records)
