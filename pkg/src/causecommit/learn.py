"""
L2-regularized binary logistic regression with a deterministic full-batch
optimizer, stratified k-fold cross-validation and F1-driven grid search.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .features import (
    FeatureConfig,
    FeatureVector,
    Vocabulary,
    build_vocabulary,
    dense_layout,
    featurize_corpus,
    to_matrix,
)

MODEL_FORMAT_VERSION = 1
DEFAULT_LAMBDAS = (0.01, 0.1, 1.0, 10.0)
DEFAULT_BUDGET = 1000
GRADIENT_TOLERANCE = 1e-6
DECISION_THRESHOLD = 0.5

# label sets: which 4-point labels a stage sees, and which count as positive
STAGE_MEMBERS = {"support": (0, 1, 2, 3), "commitment": (2, 3)}
STAGE_POSITIVE = {"support": (2, 3), "commitment": (3,)}


class NumericalError(FloatingPointError):
    pass


class DegenerateLabels(ValueError):
    pass


class LayoutMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# objective

def _design(X, n_weights: int | None = None):
    if isinstance(X, (list, tuple)):
        if X and isinstance(X[0], FeatureVector):
            n_dense = len(X[0].dense)
            if n_weights is None:
                raise ValueError("weights length needed to lay out feature vectors")
            return to_matrix(X, n_weights - n_dense, n_dense)
        return np.asarray(X, dtype=float).reshape(len(X), -1)
    if sp.issparse(X):
        return X.tocsr()
    return np.asarray(X, dtype=float)


def _objective(w, b, X, y, lam, with_grad=True):
    z = X @ w + b
    # log(1 + e^z) - y z, computed without overflow
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * lam * float(w @ w)
    if not math.isfinite(loss):
        raise NumericalError("non-finite loss")
    if not with_grad:
        return loss, None, None
    r = (expit(z) - y) / len(y)
    gw = np.asarray(X.T @ r).ravel() + lam * w
    gb = float(r.sum())
    return loss, gw, gb


def loss_and_gradient(weights, bias, X, y, lam):
    """Mean cross-entropy plus (lam/2)||w||^2; the bias is unregularized.

    Returns ``(loss, grad)`` where ``grad`` has one entry per weight followed
    by the bias derivative.
    """
    w = np.asarray(weights, dtype=float)
    y = np.asarray(y, dtype=float)
    X = _design(X, len(w))
    if X.shape[0] != len(y) or len(y) == 0:
        raise ValueError("X and y must have the same nonzero length")
    loss, gw, gb = _objective(w, float(bias), X, y, float(lam))
    return loss, np.append(gw, gb)


# ---------------------------------------------------------------------------
# model

@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    lam: float
    stage: str | None = None
    positive_class: tuple[int, ...] = ()
    config: FeatureConfig | None = None
    vocab: Vocabulary | None = None
    dimension: int | None = None
    dense_mean: np.ndarray | None = None
    dense_scale: np.ndarray | None = None
    training_meta: dict = field(default_factory=dict)
    corpus_digest: str = ""

    @property
    def layout(self):
        if self.config is None:
            return ()
        return dense_layout(self.config, self.dimension)

    @property
    def n_sparse(self) -> int:
        return len(self.vocab) if self.vocab is not None else len(self.weights)

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "stage": self.stage,
            "positive_class": list(self.positive_class),
            "lambda": self.lam,
            "bias": self.bias,
            "weights": [float(x) for x in self.weights],
            "config": self.config.to_dict() if self.config else None,
            "vocabulary": self.vocab.to_dict() if self.vocab else None,
            "dimension": self.dimension,
            "dense_mean": None if self.dense_mean is None else [float(x) for x in self.dense_mean],
            "dense_scale": None if self.dense_scale is None else [float(x) for x in self.dense_scale],
            "training_meta": self.training_meta,
            "corpus_digest": self.corpus_digest,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogisticModel":
        version = data.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version!r}")
        model = cls(
            weights=np.array(data["weights"], dtype=float),
            bias=float(data["bias"]),
            lam=float(data["lambda"]),
            stage=data.get("stage"),
            positive_class=tuple(data.get("positive_class") or ()),
            config=FeatureConfig.from_dict(data["config"]) if data.get("config") else None,
            vocab=Vocabulary.from_dict(data["vocabulary"]) if data.get("vocabulary") else None,
            dimension=data.get("dimension"),
            dense_mean=None if data.get("dense_mean") is None else np.array(data["dense_mean"]),
            dense_scale=None if data.get("dense_scale") is None else np.array(data["dense_scale"]),
            training_meta=dict(data.get("training_meta") or {}),
            corpus_digest=data.get("corpus_digest", ""),
        )
        n_dense = sum(w for _, _, w in model.layout)
        if model.vocab is not None and len(model.weights) != len(model.vocab) + n_dense:
            raise ValueError("weights length does not match vocabulary and dense layout")
        if not np.all(np.isfinite(model.weights)):
            raise ValueError("model has non-finite weights")
        return model

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LogisticModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _canonical_order(X: sp.csr_matrix, y: np.ndarray) -> np.ndarray:
    """Row order that depends only on row contents, never on input order."""
    keys = []
    for i in range(X.shape[0]):
        s, e = X.indptr[i], X.indptr[i + 1]
        keys.append((y[i], X.indices[s:e].tobytes(), X.data[s:e].tobytes()))
    return np.array(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.int64)


def train_logistic(X, y, lam: float, budget: int = DEFAULT_BUDGET,
                   gtol: float = GRADIENT_TOLERANCE) -> LogisticModel:
    """Gradient descent with Armijo backtracking, started from zero.

    Stops once the gradient's max-norm drops below ``gtol`` or after
    ``budget`` iterations. Rows are put in a content-defined order first, so
    any permutation of the training set yields bit-identical weights.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise DegenerateLabels("degenerate labels: no training examples")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        raise DegenerateLabels("degenerate labels: only one class present")
    X = sp.csr_matrix(_design(X) if not sp.issparse(X) else X, dtype=float)
    X.eliminate_zeros()
    X.sort_indices()
    if X.shape[0] != len(y):
        raise ValueError("X and y must have the same length")
    if not np.all(np.isfinite(X.data)):
        raise ValueError("non-finite feature values")
    order = _canonical_order(X, y)
    X, y = X[order], y[order]

    w = np.zeros(X.shape[1])
    b = 0.0
    loss, gw, gb = _objective(w, b, X, y, lam)
    step = 1.0
    it = 0
    converged = False
    stalled = False
    for it in range(budget + 1):
        gnorm = max(float(np.max(np.abs(gw))) if len(gw) else 0.0, abs(gb))
        if gnorm < gtol:
            converged = True
            break
        if it == budget:
            break
        sq = float(gw @ gw) + gb * gb
        step = min(step * 2.0, 1e6)
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            new_loss, _, _ = _objective(w_new, b_new, X, y, lam, with_grad=False)
            if new_loss <= loss - 1e-4 * step * sq:
                break
            step *= 0.5
            if step < 1e-30:
                stalled = True
                break
        if stalled:
            break
        w, b = w_new, b_new
        loss, gw, gb = _objective(w, b, X, y, lam)
    gnorm = max(float(np.max(np.abs(gw))) if len(gw) else 0.0, abs(gb))
    meta = {
        "iterations": it,
        "gradient_norm": gnorm,
        "loss": loss,
        "converged": converged,
        "stalled": stalled,
        "budget": budget,
    }
    return LogisticModel(weights=w, bias=b, lam=float(lam), training_meta=meta)


def _standardize(model: LogisticModel, dense: np.ndarray) -> np.ndarray:
    if model.dense_mean is None:
        return dense
    return (dense - model.dense_mean) / model.dense_scale


def _check_layout(model: LogisticModel, fv: FeatureVector):
    if fv.layout != model.layout:
        raise LayoutMismatch("feature vector dense layout differs from the model's")
    if len(fv.indices) and int(fv.indices[-1]) >= model.n_sparse:
        raise LayoutMismatch("feature index outside the model vocabulary")
    if model.n_sparse + len(fv.dense) != len(model.weights):
        raise LayoutMismatch("feature width differs from the model's")


def decision_value(model: LogisticModel, fv: FeatureVector) -> float:
    _check_layout(model, fv)
    n = model.n_sparse
    z = float(fv.values @ model.weights[fv.indices]) if len(fv.indices) else 0.0
    if len(fv.dense):
        z += float(_standardize(model, fv.dense) @ model.weights[n:])
    return z + model.bias


def predict_proba(model: LogisticModel, fv: FeatureVector) -> float:
    return float(expit(decision_value(model, fv)))


def predict_proba_many(model: LogisticModel, fvs: Sequence[FeatureVector]) -> np.ndarray:
    return np.array([predict_proba(model, fv) for fv in fvs])


# ---------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


def prf1(y_true, y_pred, positive=1) -> Metrics:
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred differ in length")
    if len(y_true) == 0:
        raise ValueError("need at least one prediction")
    tp = fp = fn = tn = 0
    for t, p in zip(y_true, y_pred):
        t_pos = t == positive
        p_pos = p == positive
        if t_pos and p_pos:
            tp += 1
        elif p_pos:
            fp += 1
        elif t_pos:
            fn += 1
        else:
            tn += 1
    return Metrics(tp, fp, fn, tn)


# ---------------------------------------------------------------------------
# stage training and cross-validation

def stage_targets(labels: Sequence[int], stage: str) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the examples a stage trains on, and their 0/1 targets."""
    if stage not in STAGE_MEMBERS:
        raise ValueError(f"unknown stage {stage!r}")
    members, positive = STAGE_MEMBERS[stage], STAGE_POSITIVE[stage]
    idx = np.array([i for i, l in enumerate(labels) if l in members], dtype=np.int64)
    y = np.array([1.0 if labels[i] in positive else 0.0 for i in idx])
    return idx, y


def corpus_digest(corpus, y) -> str:
    h = hashlib.sha256()
    for msg, label in zip(corpus, y):
        h.update(msg.message_id.encode("utf-8"))
        h.update(b"\x1f")
        h.update(msg.raw.text.encode("utf-8"))
        h.update(b"\x1f%d\x1e" % int(label))
    return h.hexdigest()


def fit_binary(corpus, y, config: FeatureConfig, lam: float, table=None, profile=None,
               budget: int = DEFAULT_BUDGET, stage: str | None = None) -> LogisticModel:
    """Build the vocabulary on ``corpus`` alone, featurize and train."""
    y = np.asarray(y, dtype=float)
    vocab = build_vocabulary(corpus, config, profile)
    fvs = featurize_corpus(corpus, vocab, config, table, profile)
    dim = table.dimension if table is not None and config.uses_dense else None
    n_dense = sum(w for _, _, w in dense_layout(config, dim))
    mean = scale = None
    if config.standardize_dense and n_dense:
        dense = np.array([fv.dense for fv in fvs])
        mean = dense.mean(axis=0)
        scale = dense.std(axis=0)
        scale[scale == 0] = 1.0
        fvs = [FeatureVector(fv.indices, fv.values, (fv.dense - mean) / scale, fv.layout) for fv in fvs]
    X = to_matrix(fvs, len(vocab), n_dense)
    model = train_logistic(X, y, lam, budget)
    model.stage = stage
    model.positive_class = STAGE_POSITIVE.get(stage, (1,))
    model.config = config
    model.vocab = vocab
    model.dimension = dim
    model.dense_mean = mean
    model.dense_scale = scale
    model.corpus_digest = corpus_digest(corpus, y)
    return model


def fit_stage(corpus, labels, stage: str, config: FeatureConfig, lam: float, table=None,
              profile=None, budget: int = DEFAULT_BUDGET) -> LogisticModel:
    """Train the support or commitment classifier from 4-point labels."""
    idx, y = stage_targets(labels, stage)
    return fit_binary([corpus[i] for i in idx], y, config, lam, table, profile, budget, stage)


def stratified_folds(y, k: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified assignment of example indices to ``k`` test folds."""
    if k < 2:
        raise ValueError("k must be >= 2")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in sorted(set(y.tolist())):
        members = np.flatnonzero(y == cls)
        if len(members) < k:
            raise ValueError(f"class {cls!r} has {len(members)} examples, fewer than k={k}")
        for j, m in enumerate(rng.permutation(members)):
            folds[(offset + j) % k].append(int(m))
        offset += len(members)
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


@dataclass
class CVReport:
    k: int
    seed: int
    lam: float
    config: FeatureConfig
    folds: list[Metrics]
    stage: str | None = None

    @property
    def mean_f1(self) -> float:
        return sum(m.f1 for m in self.folds) / len(self.folds)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "stage": self.stage,
            "lambda": self.lam,
            "config": self.config.to_dict(),
            "folds": [m.to_dict() for m in self.folds],
            "mean_f1": self.mean_f1,
        }


def kfold_cv(corpus, labels, config: FeatureConfig, lam: float, k: int = 10, seed: int = 0,
             stage: str | None = "support", table=None, profile=None,
             budget: int = DEFAULT_BUDGET) -> CVReport:
    """Stratified k-fold CV; each fold's vocabulary sees only its training part.

    With a stage name, ``labels`` are 4-point labels mapped to that stage's
    binary task; with ``stage=None`` they must already be 0/1.
    """
    if stage is None:
        idx = np.arange(len(labels))
        y = np.asarray(labels, dtype=float)
    else:
        idx, y = stage_targets(labels, stage)
    msgs = [corpus[i] for i in idx]
    results = []
    for test in stratified_folds(y, k, seed):
        mask = np.ones(len(y), dtype=bool)
        mask[test] = False
        train = np.flatnonzero(mask)
        model = fit_binary([msgs[i] for i in train], y[train], config, lam, table, profile,
                           budget, stage)
        test_fvs = featurize_corpus([msgs[i] for i in test], model.vocab, config, table, profile)
        pred = [1 if p >= DECISION_THRESHOLD else 0 for p in predict_proba_many(model, test_fvs)]
        results.append(prf1(y[test].astype(int).tolist(), pred, positive=1))
    return CVReport(k=k, seed=seed, lam=float(lam), config=config, folds=results, stage=stage)


def default_lambda_grid(configs, lambdas=DEFAULT_LAMBDAS):
    return [(c, float(l)) for c in configs for l in lambdas]


def grid_search(corpus, labels, grid, k: int = 10, seed: int = 0, stage: str | None = "support",
                table=None, profile=None, budget: int = DEFAULT_BUDGET, n_jobs: int = 1):
    """Cross-validate every (config, lambda) point under one seed.

    Returns ``(best_index, reports)``; ties go to the earliest grid point.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")

    def run(point):
        config, lam = point
        return kfold_cv(corpus, labels, config, lam, k, seed, stage, table, profile, budget)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            reports = list(pool.map(run, grid))
    else:
        reports = [run(p) for p in grid]
    best = 0
    for i, rep in enumerate(reports):
        if rep.mean_f1 > reports[best].mean_f1:
            best = i
    return best, reports
