"""Pairwise ranking of emotion intensity with a linear scoring function.

The model learns w such that w.x places emotional utterances above neutral
ones.  Training minimizes a squared-slack objective

    f(w) = 0.5 ||w||^2 + C * ( sum_ordered max(0, 1 - w.(xa - xb))^2
                             + sum_similar (w.(xa - xb))^2 )

by Newton iterations with conjugate-gradient linear solves and Armijo
backtracking.  The objective is piecewise quadratic and strictly convex,
so iterates converge to the unique minimizer.  Scores are affinely mapped
to [0, 1] using the raw-score range observed on the training set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyClassError,
    InvalidParamsError,
    NoOrderedPairsError,
    NonFiniteError,
    ParseError,
    SchemaVersionMismatchError,
)

DEFAULT_C = 1.0
DEFAULT_MAX_ITER = 200
DEFAULT_GRAD_TOL = 1e-6
MAX_ORDERED_PAIRS = 10000
STD_FLOOR = 1e-8
MODEL_SCHEMA_VERSION = 1

NEUTRAL_LABEL = "neutral"
EMOTIONAL_LABEL = "emotional"

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60


@dataclass(eq=False)
class PairSets:
    """Index pairs over a shared feature matrix.

    Ordered pairs (a, b) assert row a outranks row b; similar pairs assert
    equal rank.  Both are (n, 2) integer arrays.
    """

    ordered: np.ndarray
    similar: np.ndarray
    features: np.ndarray

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.ordered = np.asarray(self.ordered, dtype=np.int64).reshape(-1, 2)
        self.similar = np.asarray(self.similar, dtype=np.int64).reshape(-1, 2)
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise InvalidParamsError("features must be a non-empty 2-D matrix")
        n_rows = self.features.shape[0]
        for name, pairs in (("ordered", self.ordered), ("similar", self.similar)):
            if pairs.size and (pairs.min() < 0 or pairs.max() >= n_rows):
                raise InvalidParamsError(f"{name} pair index out of range")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise InvalidParamsError(f"{name} pairs must not pair a row with itself")


@dataclass(eq=False)
class RankingModel:
    """Trained scorer: weights over standardized features plus the score range."""

    emotion: str
    c: float
    weights: np.ndarray
    feature_mean: np.ndarray
    feature_std: np.ndarray
    attr_min: float
    attr_max: float
    solver_report: dict


def build_pairs(features: np.ndarray, labels, n_similar: int | None = None,
                seed: int = 0) -> PairSets:
    """Construct training pairs from neutral/emotional labels.

    Ordered pairs are the full emotional x neutral cross product, or
    MAX_ORDERED_PAIRS pairs sampled uniformly without replacement when the
    product is larger.  Similar pairs are drawn within class, split evenly
    between the two classes (odd counts favor the neutral side); a class
    with fewer than two members contributes none.  n_similar defaults to
    half the number of ordered pairs.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = list(labels)
    if features.ndim != 2 or features.shape[0] != len(labels):
        raise DimensionMismatchError("features rows and labels must align")
    bad = sorted({l for l in labels if l not in (NEUTRAL_LABEL, EMOTIONAL_LABEL)})
    if bad:
        raise InvalidParamsError(f"labels must be neutral or emotional, got {bad}")
    emo = np.array([i for i, l in enumerate(labels) if l == EMOTIONAL_LABEL], dtype=np.int64)
    neu = np.array([i for i, l in enumerate(labels) if l == NEUTRAL_LABEL], dtype=np.int64)
    if emo.size == 0 or neu.size == 0:
        raise EmptyClassError("need at least one emotional and one neutral sample")
    if n_similar is not None and n_similar < 0:
        raise InvalidParamsError("n_similar must be >= 0")

    rng = np.random.default_rng(seed)
    total = emo.size * neu.size
    if total <= MAX_ORDERED_PAIRS:
        ordered = np.column_stack([np.repeat(emo, neu.size), np.tile(neu, emo.size)])
    else:
        flat = rng.choice(total, size=MAX_ORDERED_PAIRS, replace=False)
        ordered = np.column_stack([emo[flat // neu.size], neu[flat % neu.size]])

    if n_similar is None:
        n_similar = ordered.shape[0] // 2
    n_emo_pairs = n_similar // 2
    n_neu_pairs = n_similar - n_emo_pairs

    def within(group: np.ndarray, count: int) -> np.ndarray:
        if count == 0 or group.size < 2:
            return np.empty((0, 2), dtype=np.int64)
        first = rng.integers(0, group.size, size=count)
        second = (first + rng.integers(1, group.size, size=count)) % group.size
        return np.column_stack([group[first], group[second]])

    similar = np.vstack([within(neu, n_neu_pairs), within(emo, n_emo_pairs)])
    return PairSets(ordered, similar, features)


def objective(w: np.ndarray, pairs: PairSets, c: float = DEFAULT_C) -> float:
    """Evaluate the training objective at w on the raw pair features."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (pairs.features.shape[1],):
        raise DimensionMismatchError(
            f"w has shape {w.shape}, features have {pairs.features.shape[1]} columns"
        )
    if c <= 0.0:
        raise InvalidParamsError("c must be positive")
    d_ord = pairs.features[pairs.ordered[:, 0]] - pairs.features[pairs.ordered[:, 1]]
    d_sim = pairs.features[pairs.similar[:, 0]] - pairs.features[pairs.similar[:, 1]]
    hinge = np.maximum(0.0, 1.0 - d_ord @ w)
    sim = d_sim @ w
    return float(0.5 * (w @ w) + c * (hinge @ hinge + sim @ sim))


def _cg_solve(matvec, b: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    """Conjugate gradients for a symmetric positive definite operator."""
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    b_norm = np.sqrt(rs)
    if b_norm == 0.0:
        return x
    for _ in range(b.size):
        ap = matvec(p)
        denom = float(p @ ap)
        if denom <= 0.0:
            break
        alpha = rs / denom
        x += alpha * p
        r -= alpha * ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= rel_tol * b_norm:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


def train_ranker(pairs: PairSets, c: float = DEFAULT_C, emotion: str = "",
                 standardize: bool = True,
                 max_iter: int = DEFAULT_MAX_ITER,
                 grad_tol: float = DEFAULT_GRAD_TOL) -> RankingModel:
    """Fit ranking weights by Newton iterations on the squared-slack objective.

    Features are z-scored (per-column std floored at 1e-8) unless
    standardize is False.  Iterations stop when the gradient norm falls to
    grad_tol or after max_iter accepted steps.  The solver report records
    the objective after every step; backtracking keeps it non-increasing.
    """
    if c <= 0.0:
        raise InvalidParamsError("c must be positive")
    if max_iter < 1:
        raise InvalidParamsError("max_iter must be >= 1")
    x = pairs.features
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("features contain non-finite values")
    if pairs.ordered.shape[0] == 0:
        raise NoOrderedPairsError("training needs at least one ordered pair")

    dim = x.shape[1]
    if standardize:
        mean = x.mean(axis=0)
        std = np.maximum(x.std(axis=0), STD_FLOOR)
    else:
        mean = np.zeros(dim)
        std = np.ones(dim)
    xs = (x - mean) / std
    d_ord = xs[pairs.ordered[:, 0]] - xs[pairs.ordered[:, 1]]
    d_sim = xs[pairs.similar[:, 0]] - xs[pairs.similar[:, 1]]

    def value_at(wv: np.ndarray) -> float:
        hinge = np.maximum(0.0, 1.0 - d_ord @ wv)
        sim = d_sim @ wv
        return float(0.5 * (wv @ wv) + c * (hinge @ hinge + sim @ sim))

    w = np.zeros(dim)
    history = [value_at(w)]
    converged = False
    grad_norm = np.inf
    steps = 0
    while True:
        margins = d_ord @ w
        mask = margins < 1.0
        active = d_ord[mask]
        grad = w - 2.0 * c * (active.T @ (1.0 - margins[mask])) \
            + 2.0 * c * (d_sim.T @ (d_sim @ w))
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= grad_tol:
            converged = True
            break
        if steps >= max_iter:
            break

        def hess_vec(v: np.ndarray) -> np.ndarray:
            return v + 2.0 * c * (active.T @ (active @ v)) + 2.0 * c * (d_sim.T @ (d_sim @ v))

        direction = _cg_solve(hess_vec, -grad)
        slope = float(grad @ direction)
        step = 1.0
        value = history[-1]
        for _ in range(_MAX_BACKTRACKS):
            candidate = value_at(w + step * direction)
            if candidate <= value + _ARMIJO_C1 * step * slope:
                break
            step *= 0.5
        w = w + step * direction
        history.append(candidate)
        steps += 1

    raw = xs @ w
    report = {
        "iterations": steps,
        "converged": bool(converged),
        "grad_norm": grad_norm,
        "final_objective": history[-1],
        "objective_history": history,
    }
    return RankingModel(emotion, float(c), w, mean, std,
                        float(raw.min()), float(raw.max()), report)


def score(model: RankingModel, x: np.ndarray) -> float:
    """Intensity of one feature vector in [0, 1].

    The raw score w.(x - mean)/std is mapped so the training minimum hits
    0 and the maximum hits 1, clamping anything outside that range.  A
    degenerate range (all training scores equal) maps everything to 0.5.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise DimensionMismatchError(
            f"expected vector of shape {model.weights.shape}, got {x.shape}"
        )
    raw = float(model.weights @ ((x - model.feature_mean) / model.feature_std))
    span = model.attr_max - model.attr_min
    if span <= 0.0:
        return 0.5
    return float(np.clip((raw - model.attr_min) / span, 0.0, 1.0))


def save_model(model: RankingModel, path) -> None:
    """Serialize a model as JSON; floats round-trip exactly."""
    report = dict(model.solver_report)
    report["grad_norm"] = float(report.get("grad_norm", 0.0))
    report["final_objective"] = float(report.get("final_objective", 0.0))
    report["objective_history"] = [float(v) for v in report.get("objective_history", [])]
    payload = {
        "version": MODEL_SCHEMA_VERSION,
        "emotion": model.emotion,
        "C": model.c,
        "weights": [float(v) for v in model.weights],
        "feature_mean": [float(v) for v in model.feature_mean],
        "feature_std": [float(v) for v in model.feature_std],
        "attr_min": model.attr_min,
        "attr_max": model.attr_max,
        "solver_report": report,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def load_model(path) -> RankingModel:
    """Load a model saved by save_model."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("version") != MODEL_SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"{path}: expected schema version {MODEL_SCHEMA_VERSION}, "
            f"got {payload.get('version') if isinstance(payload, dict) else type(payload).__name__}"
        )
    try:
        weights = np.asarray(payload["weights"], dtype=np.float64)
        mean = np.asarray(payload["feature_mean"], dtype=np.float64)
        std = np.asarray(payload["feature_std"], dtype=np.float64)
        model = RankingModel(
            emotion=str(payload["emotion"]),
            c=float(payload["C"]),
            weights=weights,
            feature_mean=mean,
            feature_std=std,
            attr_min=float(payload["attr_min"]),
            attr_max=float(payload["attr_max"]),
            solver_report=dict(payload["solver_report"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaVersionMismatchError(f"{path}: malformed model payload ({exc})") from exc
    if not (weights.shape == mean.shape == std.shape) or weights.ndim != 1:
        raise SchemaVersionMismatchError(f"{path}: weight and scaler shapes disagree")
    return model
