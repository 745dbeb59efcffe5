"""Correlation metrics, monotone remapping, and the split-trial protocol.

Rank correlation is computed as the Pearson correlation of fractional
(tie-averaged) ranks, which reduces to the classic 1 - 6*sum(d^2) /
(n(n^2-1)) formula when no ties are present. Linear correlation and
RMSE are reported after remapping raw scores through a fitted
five-parameter monotone logistic; rank correlation uses raw scores.

The trial harness repeats: seeded shuffle, fractional split, train,
predict on the held-out rows, fit the logistic on those predictions,
record all three metrics. Failed trials are recorded, not fatal.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.special import expit

from .errors import DegenerateDataError, PanoqaError, ValidationError
from .regression import SvrParams, grid_search_svr, train_svr

LOGISTIC_MAX_EVALS = 3000  # ~500 damped iterations with a numerical Jacobian


def _metric_inputs(a, b, minimum):
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValidationError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < minimum:
        raise ValidationError(f"need at least {minimum} points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("metric inputs contain non-finite values")
    return x, y


def fractional_ranks(values):
    """1-based ranks; runs of equal values share their average rank."""
    v = np.asarray(values, dtype=np.float64).ravel()
    order = np.argsort(v, kind="stable")
    sv = v[order]
    n = v.size
    starts = np.flatnonzero(np.r_[True, sv[1:] != sv[:-1]])
    ends = np.r_[starts[1:], n]
    ranks = np.empty(n, dtype=np.float64)
    for start, end in zip(starts, ends):
        ranks[order[start:end]] = (start + end - 1) / 2.0 + 1.0
    return ranks


def _pearson(x, y):
    dx = x - x.mean()
    dy = y - y.mean()
    ssx = float(np.sum(dx * dx))
    ssy = float(np.sum(dy * dy))
    if ssx == 0.0 or ssy == 0.0:
        raise DegenerateDataError("correlation undefined for a zero-variance input")
    return float(np.sum(dx * dy)) / math.sqrt(ssx * ssy)


def srocc(subjective, objective):
    """Rank correlation of two score vectors (ties averaged)."""
    x, y = _metric_inputs(subjective, objective, 3)
    return _pearson(fractional_ranks(x), fractional_ranks(y))


def plcc(subjective, mapped):
    """Pearson linear correlation; feed remapped scores by convention."""
    x, y = _metric_inputs(subjective, mapped, 3)
    return _pearson(x, y)


def rmse(subjective, mapped):
    """Root mean squared error; feed remapped scores by convention."""
    x, y = _metric_inputs(subjective, mapped, 1)
    d = x - y
    return math.sqrt(float(np.mean(d * d)))


@dataclass(frozen=True)
class LogisticParams:
    """Five-parameter monotone logistic y = b1*(1/2 - 1/(1+exp(b2*(x-b3)))) + b4*x + b5."""

    beta1: float
    beta2: float
    beta3: float
    beta4: float
    beta5: float
    converged: bool = True

    def coefficients(self):
        return (self.beta1, self.beta2, self.beta3, self.beta4, self.beta5)


def logistic_map(params, x):
    """Evaluate the fitted logistic at x (scalar or array), overflow-safe."""
    arr = np.asarray(x, dtype=np.float64)
    core = 0.5 - expit(-(params.beta2 * (arr - params.beta3)))
    out = params.beta1 * core + params.beta4 * arr + params.beta5
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def _linear_fallback(raw, mos):
    if raw.std() == 0.0:
        return LogisticParams(0.0, 0.0, 0.0, 0.0, float(mos.mean()), converged=True)
    slope, intercept = np.polyfit(raw, mos, 1)
    return LogisticParams(0.0, 0.0, 0.0, float(slope), float(intercept), converged=False)


def fit_logistic(raw, mos):
    """Least-squares fit of the five-parameter logistic.

    Damped least squares with a numerical Jacobian, started from the
    conventional initializer (output spread, inverse input spread,
    input mean, 0, output mean), capped at ~500 iterations. A constant
    raw input falls back to the trivial constant map; a fit that fails
    to converge returns the best iterate with converged=False.
    """
    raw_v, mos_v = _metric_inputs(raw, mos, 5)
    spread = float(raw_v.std())
    if spread == 0.0:
        return _linear_fallback(raw_v, mos_v)
    start = np.array([
        float(mos_v.max() - mos_v.min()),
        1.0 / spread,
        float(raw_v.mean()),
        0.0,
        float(mos_v.mean()),
    ])

    def residuals(b):
        core = 0.5 - expit(-(b[1] * (raw_v - b[2])))
        return b[0] * core + b[3] * raw_v + b[4] - mos_v

    result = least_squares(residuals, start, method="lm", max_nfev=LOGISTIC_MAX_EVALS)
    if not np.all(np.isfinite(result.x)):
        return _linear_fallback(raw_v, mos_v)
    b = [float(v) for v in result.x]
    return LogisticParams(*b, converged=bool(result.success))


def round_half_up(x):
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class TrialResult:
    """One trial's metrics; error holds the failure text when it failed."""

    index: int
    seed: int
    srocc: float
    plcc: float
    rmse: float
    error: str | None = None

    @property
    def failed(self):
        return self.error is not None


@dataclass
class TrialSummary:
    """All trial results plus the split geometry used."""

    results: list
    train_size: int
    test_size: int

    @property
    def failure_count(self):
        return sum(1 for r in self.results if r.failed)

    def metric_values(self, name):
        return np.array([getattr(r, name) for r in self.results if not r.failed])

    def metric_summary(self):
        """{metric: (median, mean, std)} over the successful trials."""
        out = {}
        for name in ("srocc", "plcc", "rmse"):
            values = self.metric_values(name)
            if values.size == 0:
                out[name] = (math.nan, math.nan, math.nan)
            else:
                out[name] = (float(np.median(values)), float(values.mean()),
                             float(values.std()))
        return out


def split_indices(n, train_fraction, rng, groups=None):
    """One seeded train/test split.

    Default mode shuffles items and takes round(train_fraction * n) for
    training. Group mode (same-content items share a label) shuffles
    the unique labels instead and assigns whole groups.
    """
    if groups is None:
        perm = rng.permutation(n)
        k = round_half_up(train_fraction * n)
        k = min(max(k, 1), n - 1)
        return np.sort(perm[:k]), np.sort(perm[k:])
    labels = list(dict.fromkeys(groups))
    if len(labels) < 2:
        raise ValidationError("group split needs at least 2 distinct groups")
    order = rng.permutation(len(labels))
    k = round_half_up(train_fraction * len(labels))
    k = min(max(k, 1), len(labels) - 1)
    train_labels = {labels[i] for i in order[:k]}
    mask = np.array([g in train_labels for g in groups])
    return np.flatnonzero(mask), np.flatnonzero(~mask)


def run_trials(features, scores, trials=1000, train_fraction=0.8, seed=0,
               svr=SvrParams(), groups=None, grid_search=False):
    """Repeat the split-train-test protocol and collect per-trial metrics.

    Every trial gets its own recorded sub-seed drawn from the master
    seed, so any single trial can be reproduced later. Trials that fail
    numerically are recorded with their error and skipped in summaries.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(scores, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ValidationError(
            f"features {x.shape} and scores {y.shape} do not line up")
    if x.shape[0] < 10:
        raise ValidationError(f"need at least 10 items, got {x.shape[0]}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train fraction must lie in (0, 1), got {train_fraction}")
    if groups is not None and len(groups) != x.shape[0]:
        raise ValidationError("groups length does not match the dataset")

    master = np.random.default_rng(seed)
    trial_seeds = master.integers(0, 2 ** 31 - 1, size=trials)
    results = []
    train_size = test_size = 0
    for index, trial_seed in enumerate(trial_seeds):
        rng = np.random.default_rng(int(trial_seed))
        train_idx, test_idx = split_indices(x.shape[0], train_fraction, rng, groups)
        train_size, test_size = train_idx.size, test_idx.size
        try:
            params = svr
            if grid_search:
                cost, gamma, _ = grid_search_svr(
                    x[train_idx], y[train_idx], epsilon=svr.epsilon,
                    seed=int(trial_seed), tolerance=svr.tolerance,
                    max_iterations=svr.max_iterations)
                params = SvrParams(cost=cost, gamma=gamma, epsilon=svr.epsilon,
                                   tolerance=svr.tolerance,
                                   max_iterations=svr.max_iterations)
            model = train_svr(x[train_idx], y[train_idx], params)
            predictions = model.predict(x[test_idx])
            rank_corr = srocc(y[test_idx], predictions)
            logistic = fit_logistic(predictions, y[test_idx])
            mapped = logistic_map(logistic, predictions)
            results.append(TrialResult(
                index=index, seed=int(trial_seed),
                srocc=rank_corr,
                plcc=plcc(y[test_idx], mapped),
                rmse=rmse(y[test_idx], mapped),
            ))
        except PanoqaError as exc:
            results.append(TrialResult(
                index=index, seed=int(trial_seed),
                srocc=math.nan, plcc=math.nan, rmse=math.nan, error=str(exc)))
    return TrialSummary(results=results, train_size=train_size, test_size=test_size)
