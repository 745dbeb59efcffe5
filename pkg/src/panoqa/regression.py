"""Epsilon-insensitive RBF regression with a deterministic dual solver.

Training minimizes 0.5 b'Kb - y'b + eps * |b|_1 over the net dual
coefficients b (one per training row, box [-C, C], sum zero), with
K the RBF kernel matrix. The solver repeatedly picks the maximally
KKT-violating pair (ties broken by lowest index) and solves that
two-variable subproblem exactly, stopping once the violation drops to
the tolerance or the iteration cap is reached.

Features are min-max scaled to [-1, 1] before the kernel ever sees
them; constant dimensions map to 0. Models persist as a versioned,
human-readable text format with 17 significant digits so a save/load
round trip predicts bit-identically.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ModelFormatError, ValidationError

MODEL_FORMAT_VERSION = 1
GRID_COSTS = tuple(2.0 ** e for e in range(-1, 13))
GRID_GAMMAS = tuple(2.0 ** e for e in range(-10, 3))


def _fmt(x):
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SvrParams:
    """Training hyperparameters. gamma None means 1 / n_features."""

    cost: float = 1024.0
    gamma: float | None = None
    epsilon: float = 0.1
    tolerance: float = 1e-3
    max_iterations: int = 1_000_000

    def __post_init__(self):
        if not self.cost > 0:
            raise ValidationError(f"cost must be positive, got {self.cost}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if not self.epsilon >= 0:
            raise ValidationError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.tolerance > 0:
            raise ValidationError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")


class FeatureScaler:
    """Per-dimension min-max map onto [-1, 1]; constant dimensions map to 0."""

    __slots__ = ("minimum", "maximum")

    def __init__(self, minimum, maximum):
        self.minimum = np.asarray(minimum, dtype=np.float64)
        self.maximum = np.asarray(maximum, dtype=np.float64)
        if self.minimum.shape != self.maximum.shape or self.minimum.ndim != 1:
            raise ValidationError("scaler bounds must be two equal-length vectors")
        if np.any(self.maximum < self.minimum):
            raise ValidationError("scaler maximum below minimum")

    @classmethod
    def fit(cls, features):
        x = np.asarray(features, dtype=np.float64)
        return cls(x.min(axis=0), x.max(axis=0))

    def transform(self, features):
        x = np.asarray(features, dtype=np.float64)
        span = self.maximum - self.minimum
        safe = np.where(span > 0, span, 1.0)
        scaled = 2.0 * (x - self.minimum) / safe - 1.0
        return np.where(span > 0, scaled, 0.0)


@dataclass
class SvrModel:
    """A trained model: scaled support vectors, net coefficients, bias."""

    support_vectors: np.ndarray
    coefficients: np.ndarray
    bias: float
    gamma: float
    cost: float
    epsilon: float
    scaler: FeatureScaler
    converged: bool = True

    @property
    def feature_dim(self):
        return self.scaler.minimum.size

    def predict(self, features):
        """Score one feature vector (returns float) or a matrix (array)."""
        x = np.asarray(features, dtype=np.float64)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        if pts.shape[1] != self.feature_dim:
            raise ValidationError(
                f"feature width {pts.shape[1]} does not match model width {self.feature_dim}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("features contain non-finite values")
        z = self.scaler.transform(pts)
        if self.support_vectors.shape[0]:
            k = _rbf_kernel(z, self.support_vectors, self.gamma)
            values = k @ self.coefficients + self.bias
        else:
            values = np.full(pts.shape[0], self.bias)
        return float(values[0]) if single else values


def _rbf_kernel(a, b, gamma):
    sq = (np.sum(a * a, axis=1)[:, None]
          + np.sum(b * b, axis=1)[None, :]
          - 2.0 * (a @ b.T))
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _pair_step(kernel, g, beta, i, j, cost, eps):
    """Exact minimizer of the two-variable subproblem in delta.

    beta[i] moves by +delta and beta[j] by -delta; the piecewise
    quadratic is evaluated at every breakpoint, box edge, and segment
    stationary point, and the best feasible delta wins (smallest delta
    on ties, for determinism).
    """
    lo = max(-cost - beta[i], beta[j] - cost)
    hi = min(cost - beta[i], beta[j] + cost)
    if not hi > lo:
        return 0.0
    curvature = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
    slope = g[i] - g[j]

    candidates = {lo, hi}
    for breakpoint in (-beta[i], beta[j]):
        if lo < breakpoint < hi:
            candidates.add(breakpoint)
    if curvature > 0.0:
        for si in (-1.0, 1.0):
            for sj in (-1.0, 1.0):
                stationary = -(slope + eps * (si - sj)) / curvature
                if lo < stationary < hi:
                    candidates.add(stationary)

    def step_cost(delta):
        return (0.5 * curvature * delta * delta + slope * delta
                + eps * (abs(beta[i] + delta) - abs(beta[i]))
                + eps * (abs(beta[j] - delta) - abs(beta[j])))

    best = min(sorted(candidates), key=step_cost)
    return best if step_cost(best) < 0.0 else 0.0


def _selection_bounds(g, beta, cost, eps):
    """Directional-derivative bounds for working-pair selection.

    up[i] is the objective rate of increasing beta[i] (+inf when at the
    upper box bound); dn[j] the rate whose excess over up signals a KKT
    violation when decreasing beta[j] is allowed.
    """
    up = np.where(beta < cost, g + np.where(beta >= 0, eps, -eps), np.inf)
    dn = np.where(beta > -cost, g + np.where(beta > 0, eps, -eps), -np.inf)
    return up, dn


def _solve_dual(kernel, y, cost, eps, tol, max_iterations):
    n = y.size
    beta = np.zeros(n)
    g = -y.astype(np.float64).copy()  # g_i = (K beta)_i - y_i
    converged = False
    for _ in range(max_iterations):
        up, dn = _selection_bounds(g, beta, cost, eps)
        i = int(np.argmin(up))
        j = int(np.argmax(dn))
        if dn[j] - up[i] <= tol:
            converged = True
            break
        delta = _pair_step(kernel, g, beta, i, j, cost, eps)
        if delta == 0.0:
            break
        beta[i] = min(max(beta[i] + delta, -cost), cost)
        beta[j] = min(max(beta[j] - delta, -cost), cost)
        g += delta * (kernel[:, i] - kernel[:, j])
    up, dn = _selection_bounds(g, beta, cost, eps)
    bias = -0.5 * (float(np.min(up)) + float(np.max(dn)))
    return beta, bias, converged


def kkt_violation(kernel, y, beta, cost, eps):
    """Largest pairwise KKT violation of a dual iterate (<= 0 is optimal)."""
    g = kernel @ beta - y
    up, dn = _selection_bounds(g, beta, cost, eps)
    return float(np.max(dn) - np.min(up))


def train_svr(features, targets, params=SvrParams()):
    """Fit the scaler and solve the dual for one training set.

    Needs at least 4 rows. If the iteration cap is hit first, the model
    is still returned with converged=False.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 4:
        raise ValidationError(f"need a 2-D feature matrix with >= 4 rows, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise ValidationError(
            f"targets shape {y.shape} does not match {x.shape[0]} feature rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("training data contains non-finite values")

    scaler = FeatureScaler.fit(x)
    z = scaler.transform(x)
    gamma = params.gamma if params.gamma is not None else 1.0 / x.shape[1]
    kernel = _rbf_kernel(z, z, gamma)
    beta, bias, converged = _solve_dual(
        kernel, y, params.cost, params.epsilon, params.tolerance, params.max_iterations)
    keep = beta != 0.0
    return SvrModel(
        support_vectors=z[keep],
        coefficients=beta[keep],
        bias=bias,
        gamma=gamma,
        cost=params.cost,
        epsilon=params.epsilon,
        scaler=scaler,
        converged=converged,
    )


def grid_search_svr(features, targets, epsilon=0.1, folds=5, seed=0,
                    tolerance=1e-3, max_iterations=1_000_000):
    """Pick (cost, gamma) on the log2 grid by k-fold cross validation.

    Scans cost over 2^-1..2^12 and gamma over 2^-10..2^2, scoring each
    pair by pooled held-out RMSE; ties go to the earliest grid entry.
    Returns (cost, gamma, best_rmse).
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    n = x.shape[0]
    if n < 2 * folds:
        raise ValidationError(f"need at least {2 * folds} rows for {folds}-fold search, got {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    fold_slices = np.array_split(order, folds)

    best = None
    for cost in GRID_COSTS:
        for gamma in GRID_GAMMAS:
            squared = 0.0
            count = 0
            try:
                for held in fold_slices:
                    mask = np.ones(n, dtype=bool)
                    mask[held] = False
                    model = train_svr(x[mask], y[mask], SvrParams(
                        cost=cost, gamma=gamma, epsilon=epsilon,
                        tolerance=tolerance, max_iterations=max_iterations))
                    err = model.predict(x[held]) - y[held]
                    squared += float(np.sum(err * err))
                    count += held.size
            except DegenerateDataError:
                continue
            score = math.sqrt(squared / count)
            if best is None or score < best[2]:
                best = (cost, gamma, score)
    if best is None:
        raise DegenerateDataError("grid search failed on every hyperparameter pair")
    return best


def save_model(model):
    """Serialize a model to the versioned text format."""
    lines = [
        f"version {MODEL_FORMAT_VERSION}",
        "kernel rbf",
        f"gamma {_fmt(model.gamma)}",
        f"c {_fmt(model.cost)}",
        f"epsilon {_fmt(model.epsilon)}",
        "scaler_min " + " ".join(_fmt(v) for v in model.scaler.minimum),
        "scaler_max " + " ".join(_fmt(v) for v in model.scaler.maximum),
        f"bias {_fmt(model.bias)}",
    ]
    for coef, vec in zip(model.coefficients, model.support_vectors):
        lines.append("sv " + _fmt(coef) + " " + " ".join(_fmt(v) for v in vec))
    return "\n".join(lines) + "\n"


def _parse_floats(field, text):
    try:
        return np.array([float(tok) for tok in text.split()], dtype=np.float64)
    except ValueError as exc:
        raise ModelFormatError(f"{field}: {exc}") from None


def _take_line(lines, index, field):
    if index >= len(lines):
        raise ModelFormatError(f"{field}: unexpected end of model text")
    line = lines[index]
    key, _, rest = line.partition(" ")
    if key != field:
        raise ModelFormatError(f"line {index + 1}: expected field {field!r}, found {key!r}")
    return rest


def _scalar(field, text):
    parts = text.split()
    if len(parts) != 1:
        raise ModelFormatError(f"{field}: expected one value, got {len(parts)}")
    try:
        return float(parts[0])
    except ValueError:
        raise ModelFormatError(f"{field}: invalid number {parts[0]!r}") from None


def load_model(text):
    """Parse the text format back into a model, checking consistency."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    version_text = _take_line(lines, 0, "version")
    if version_text.strip() != str(MODEL_FORMAT_VERSION):
        raise ModelFormatError(
            f"version: unsupported {version_text.strip()!r}, expected {MODEL_FORMAT_VERSION}")
    kernel = _take_line(lines, 1, "kernel").strip()
    if kernel != "rbf":
        raise ModelFormatError(f"kernel: unsupported {kernel!r}")
    gamma = _scalar("gamma", _take_line(lines, 2, "gamma"))
    cost = _scalar("c", _take_line(lines, 3, "c"))
    epsilon = _scalar("epsilon", _take_line(lines, 4, "epsilon"))
    scaler_min = _parse_floats("scaler_min", _take_line(lines, 5, "scaler_min"))
    scaler_max = _parse_floats("scaler_max", _take_line(lines, 6, "scaler_max"))
    bias = _scalar("bias", _take_line(lines, 7, "bias"))
    if scaler_min.size != scaler_max.size:
        raise ModelFormatError(
            f"scaler_max: length {scaler_max.size} does not match scaler_min {scaler_min.size}")
    dim = scaler_min.size

    coefficients = []
    vectors = []
    for offset, line in enumerate(lines[8:]):
        field = f"sv[{offset}]"
        key, _, rest = line.partition(" ")
        if key != "sv":
            raise ModelFormatError(f"{field}: expected field 'sv', found {key!r}")
        row = _parse_floats(field, rest)
        if row.size != dim + 1:
            raise ModelFormatError(
                f"{field}: expected {dim + 1} numbers (coefficient + vector), got {row.size}")
        coefficients.append(row[0])
        vectors.append(row[1:])

    coefficients = np.array(coefficients, dtype=np.float64)
    if coefficients.size and float(np.max(np.abs(coefficients))) > cost * (1 + 1e-12) + 1e-12:
        raise ModelFormatError("sv: a dual coefficient exceeds the cost bound")
    support = (np.array(vectors, dtype=np.float64) if vectors
               else np.empty((0, dim), dtype=np.float64))
    if not (gamma > 0 and cost > 0 and epsilon >= 0):
        raise ModelFormatError("gamma/c/epsilon: values out of range")
    return SvrModel(
        support_vectors=support,
        coefficients=coefficients,
        bias=bias,
        gamma=gamma,
        cost=cost,
        epsilon=epsilon,
        scaler=FeatureScaler(scaler_min, scaler_max),
    )


def write_model(path, model):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(save_model(model))


def read_model(path):
    with open(path, "r", encoding="ascii") as fh:
        return load_model(fh.read())
