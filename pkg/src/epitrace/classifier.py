"""Transmission-edge classification from path-centrality features.

Each incoming edge of a positive leaf becomes one example: was this contact
the actual transmission? The positive class is rare (one true edge per
infectee), so training minimizes class-weighted binary cross-entropy with
the positive weight set to the train-split negative/positive ratio.

The default model is logistic regression; a two-layer perceptron is
available. Both train full-batch for a fixed number of epochs and are
deterministic under a fixed seed and example order. Held-out evaluation
splits 80/20 by leaf so one leaf's edges never straddle the split.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .centrality import IpcResult
from .csvio import write_csv
from .errors import ConfigError, IntegrityError, TrainingError
from .tracing import TracingDag

PI_FEATURES = ("normalized_pi", "raw_pi")
PLUMBING_FEATURES = (
    "candidate_out_degree",
    "candidate_in_degree",
    "same_day_contact_count",
    "hour_of_contact",
)
ALL_FEATURES = PI_FEATURES + PLUMBING_FEATURES


@dataclass(frozen=True)
class EdgeExample:
    leaf: int
    candidate: int
    hour: int
    poi: int
    features: tuple[float, ...]
    label: bool


@dataclass
class TrainConfig:
    model: str = "logistic"  # or "mlp"
    epochs: int = 300
    learning_rate: float = 0.5
    hidden_units: int = 16
    holdout_fraction: float = 0.2
    rng_seed: int = 0

    def validate(self) -> None:
        if self.model not in ("logistic", "mlp"):
            raise ConfigError(f"unknown model kind {self.model!r}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ConfigError("holdout_fraction must be in (0, 1)")
        if self.hidden_units < 1:
            raise ConfigError("hidden_units must be >= 1")


@dataclass
class EpochMetrics:
    epoch: int
    split: str
    f1: float
    precision: float
    recall: float


@dataclass
class EdgeClassifier:
    kind: str
    feature_names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    weights: dict[str, np.ndarray]
    pos_weight: float
    config: TrainConfig
    history: list[EpochMetrics] = field(default_factory=list)

    def schema_hash(self) -> str:
        payload = f"{self.kind}|{','.join(self.feature_names)}"
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Sigmoid scores in (0, 1) for a feature matrix."""
        Z = (X - self.mean) / self.std
        if self.kind == "logistic":
            logits = Z @ self.weights["w"] + self.weights["b"]
        else:
            hidden = np.tanh(Z @ self.weights["w1"] + self.weights["b1"])
            logits = hidden @ self.weights["w2"] + self.weights["b2"]
        return _sigmoid(logits)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.scores(X) >= 0.5


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def leaf_examples(
    dag: TracingDag,
    leaf: int,
    result: IpcResult,
    include_pi: bool = True,
) -> list[EdgeExample]:
    """One example per incoming edge of a single scored leaf."""
    edges = dag.parents_of(leaf)
    examples: list[EdgeExample] = []
    same_day = float(len(edges))
    for e in sorted(edges):
        plumbing = (
            float(dag.out_degree(e.parent)),
            float(dag.in_degree(e.parent)),
            same_day,
            e.hour / 23.0,
        )
        if include_pi:
            feats = (result.scores[e.parent], result.raw[e.parent]) + plumbing
        else:
            feats = plumbing
        examples.append(EdgeExample(leaf, e.parent, e.hour, e.poi, feats, e.is_transmission))
    return examples


def build_training_set(
    dag: TracingDag,
    ipc_results: Sequence[IpcResult],
    include_pi: bool = True,
) -> list[EdgeExample]:
    """One example per incoming edge of each scored leaf.

    Labels come from the hidden is_transmission flags; class imbalance is
    left intact. `include_pi=False` drops the centrality features (the
    0-hop ablation), keeping only the plumbing features.
    """
    by_leaf = {r.leaf: r for r in ipc_results}
    examples: list[EdgeExample] = []
    for leaf in sorted(dag.leaf_set):
        if not dag.parents_of(leaf):
            continue
        if leaf not in by_leaf:
            raise IntegrityError(f"leaf {leaf} has recorded contacts but no centrality result")
        examples.extend(leaf_examples(dag, leaf, by_leaf[leaf], include_pi=include_pi))
    return examples


def split_by_leaf(
    examples: Sequence[EdgeExample], holdout_fraction: float, rng_seed: int
) -> tuple[list[EdgeExample], list[EdgeExample]]:
    """Deterministic train/holdout split keeping each leaf's edges together."""
    leaves = sorted({ex.leaf for ex in examples})
    rng = np.random.default_rng(rng_seed)
    order = rng.permutation(len(leaves))
    n_holdout = max(1, int(round(len(leaves) * holdout_fraction)))
    holdout_leaves = {leaves[i] for i in order[:n_holdout]}
    train = [ex for ex in examples if ex.leaf not in holdout_leaves]
    holdout = [ex for ex in examples if ex.leaf in holdout_leaves]
    return train, holdout


def _matrix(examples: Sequence[EdgeExample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([ex.features for ex in examples], dtype=np.float64)
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    return X, y


def train(examples: Sequence[EdgeExample], config: TrainConfig) -> EdgeClassifier:
    """Fit a class-weighted edge classifier; records per-epoch F1 curves."""
    config.validate()
    if not examples:
        raise TrainingError("no training examples")
    n_features = len(examples[0].features)
    feature_names = ALL_FEATURES if n_features == len(ALL_FEATURES) else PLUMBING_FEATURES
    if n_features != len(feature_names):
        raise ConfigError(f"unexpected feature vector length {n_features}")

    train_ex, holdout_ex = split_by_leaf(examples, config.holdout_fraction, config.rng_seed)
    X, y = _matrix(train_ex)
    Xh, yh = _matrix(holdout_ex)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise TrainingError(
            f"training split needs both classes (got {n_pos} positive, {n_neg} negative)"
        )

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    Z = (X - mean) / std
    Zh = (Xh - mean) / std

    pos_weight = n_neg / n_pos
    sample_w = np.where(y == 1.0, pos_weight, 1.0)
    sample_w = sample_w / sample_w.sum()

    rng = np.random.default_rng(config.rng_seed)
    if config.model == "logistic":
        weights = {"w": np.zeros(n_features), "b": np.zeros(1)}
    else:
        h = config.hidden_units
        weights = {
            "w1": rng.normal(0.0, 1.0 / np.sqrt(n_features), size=(n_features, h)),
            "b1": np.zeros(h),
            "w2": rng.normal(0.0, 1.0 / np.sqrt(h), size=h),
            "b2": np.zeros(1),
        }

    model = EdgeClassifier(
        kind=config.model,
        feature_names=feature_names,
        mean=mean,
        std=std,
        weights=weights,
        pos_weight=pos_weight,
        config=config,
    )

    def forward(Zs: np.ndarray) -> np.ndarray:
        if config.model == "logistic":
            return _sigmoid(Zs @ weights["w"] + weights["b"])
        hidden = np.tanh(Zs @ weights["w1"] + weights["b1"])
        return _sigmoid(hidden @ weights["w2"] + weights["b2"])

    lr = config.learning_rate
    for epoch in range(1, config.epochs + 1):
        if config.model == "logistic":
            p = _sigmoid(Z @ weights["w"] + weights["b"])
            g = (p - y) * sample_w
            weights["w"] -= lr * (Z.T @ g)
            weights["b"] -= lr * g.sum(keepdims=True)
        else:
            hidden = np.tanh(Z @ weights["w1"] + weights["b1"])
            p = _sigmoid(hidden @ weights["w2"] + weights["b2"])
            g = (p - y) * sample_w
            g_hidden = np.outer(g, weights["w2"]) * (1.0 - hidden**2)
            weights["w2"] -= lr * (hidden.T @ g)
            weights["b2"] -= lr * np.array([g.sum()])
            weights["w1"] -= lr * (Z.T @ g_hidden)
            weights["b1"] -= lr * g_hidden.sum(axis=0)

        for split, Zs, ys in (("train", Z, y), ("holdout", Zh, yh)):
            pred = forward(Zs) >= 0.5
            prec, rec = precision_recall(pred, ys == 1.0)
            model.history.append(
                EpochMetrics(epoch, split, f1_score(pred, ys == 1.0), prec, rec)
            )
    return model


def precision_recall(predictions: Sequence, labels: Sequence) -> tuple[float, float]:
    pred = np.asarray(predictions, dtype=bool)
    lab = np.asarray(labels, dtype=bool)
    if pred.shape != lab.shape:
        raise ConfigError("predictions and labels must have equal length")
    tp = int(np.sum(pred & lab))
    fp = int(np.sum(pred & ~lab))
    fn = int(np.sum(~pred & lab))
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    return precision, recall


def f1_score(predictions: Sequence, labels: Sequence) -> float:
    """Harmonic mean of positive-class precision and recall; 0 when both vanish."""
    precision, recall = precision_recall(predictions, labels)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def final_holdout_f1(model: EdgeClassifier) -> float:
    rows = [m for m in model.history if m.split == "holdout"]
    return rows[-1].f1 if rows else 0.0


def predict_infector(
    model: EdgeClassifier, leaf: int, examples_for_leaf: Sequence[EdgeExample]
) -> tuple[int, float] | None:
    """Most likely infector among the leaf's candidates; None when empty.

    Candidates with several contact edges score as their best edge; ties
    break toward the lower candidate id.
    """
    if not examples_for_leaf:
        return None
    X = np.array([ex.features for ex in examples_for_leaf], dtype=np.float64)
    scores = model.scores(X)
    best: dict[int, float] = {}
    for ex, s in zip(examples_for_leaf, scores):
        if ex.leaf != leaf:
            raise IntegrityError(f"example for leaf {ex.leaf} passed while predicting {leaf}")
        if ex.candidate not in best or s > best[ex.candidate]:
            best[ex.candidate] = float(s)
    winner = min(best, key=lambda c: (-best[c], c))
    return winner, best[winner]


def ablate_hops(
    dag: TracingDag,
    hop_values: Sequence[int],
    alpha: float,
    config: TrainConfig,
) -> dict[int, float]:
    """Retrain per max-hop value; 0 hops drops the centrality features."""
    from .centrality import IpcParams, batch_ipc

    out: dict[int, float] = {}
    for hops in hop_values:
        if hops == 0:
            results = batch_ipc(dag, dag.leaf_set, IpcParams(alpha=alpha, max_hops=1))
            examples = build_training_set(dag, results, include_pi=False)
        else:
            results = batch_ipc(dag, dag.leaf_set, IpcParams(alpha=alpha, max_hops=hops))
            examples = build_training_set(dag, results, include_pi=True)
        out[hops] = final_holdout_f1(train(examples, config))
    return out


def ablate_alpha(
    dag: TracingDag,
    alpha_values: Sequence[float],
    hops: int,
    config: TrainConfig,
) -> dict[float, float]:
    """Retrain per decay value at a fixed hop depth."""
    from .centrality import IpcParams, batch_ipc

    out: dict[float, float] = {}
    for alpha in alpha_values:
        results = batch_ipc(dag, dag.leaf_set, IpcParams(alpha=alpha, max_hops=hops))
        examples = build_training_set(dag, results, include_pi=True)
        out[alpha] = final_holdout_f1(train(examples, config))
    return out


def write_metrics(path: str, model: EdgeClassifier, comment: str | None = None) -> None:
    write_csv(
        path,
        ("epoch", "split", "f1", "precision", "recall"),
        (
            (m.epoch, m.split, repr(m.f1), repr(m.precision), repr(m.recall))
            for m in model.history
        ),
        comment=comment,
    )


MODEL_FORMAT_VERSION = 1


def save_model(path: str, model: EdgeClassifier) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "feature_names": list(model.feature_names),
        "schema_hash": model.schema_hash(),
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
        "weights": {k: v.tolist() for k, v in model.weights.items()},
        "pos_weight": model.pos_weight,
        "config": {
            "model": model.config.model,
            "epochs": model.config.epochs,
            "learning_rate": model.config.learning_rate,
            "hidden_units": model.config.hidden_units,
            "holdout_fraction": model.config.holdout_fraction,
            "rng_seed": model.config.rng_seed,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> EdgeClassifier:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ConfigError(f"unsupported model format in {path}")
    config = TrainConfig(**payload["config"])
    model = EdgeClassifier(
        kind=payload["kind"],
        feature_names=tuple(payload["feature_names"]),
        mean=np.array(payload["mean"], dtype=np.float64),
        std=np.array(payload["std"], dtype=np.float64),
        weights={k: np.array(v, dtype=np.float64) for k, v in payload["weights"].items()},
        pos_weight=payload["pos_weight"],
        config=config,
    )
    if model.schema_hash() != payload["schema_hash"]:
        raise ConfigError(f"model schema hash mismatch in {path}")
    return model
