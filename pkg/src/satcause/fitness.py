"""Out-of-sample fit of a learned graph as a predictor of one target."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .causal import _ols
from .dag import Dag
from .dataset import Dataset, design_columns, kfold_split
from .errors import DataError, ZeroVariance


@dataclass(frozen=True)
class FitReport:
    target: str
    k: int
    mse: float
    fold_mse: tuple[float, ...]
    pearson: float
    baseline_mse: float
    baseline_fold_mse: tuple[float, ...]
    regressors: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "k": self.k,
            "mse": self.mse,
            "fold_mse": list(self.fold_mse),
            "pearson": self.pearson,
            "baseline_mse": self.baseline_mse,
            "baseline_fold_mse": list(self.baseline_fold_mse),
            "regressors": list(self.regressors),
        }


def pearson(xs, ys) -> float:
    """Product-moment correlation of two equally long sequences."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two 1-d sequences of equal length >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt(xc @ xc)
    sy = np.sqrt(yc @ yc)
    if sx == 0:
        raise ZeroVariance("xs")
    if sy == 0:
        raise ZeroVariance("ys")
    r = float((xc / sx) @ (yc / sy))
    return min(1.0, max(-1.0, r))


def _cv_predict(d: Dataset, target: str, regressors: Sequence[str], plan) -> tuple[list[float], np.ndarray]:
    """Held-out predictions for every row and the per-fold MSE."""
    _, block = design_columns(d, regressors)
    X = np.column_stack([np.ones(d.n), block]) if block.size else np.ones((d.n, 1))
    y = d.columns[target]
    pred = np.empty(d.n)
    fold_mse = []
    for i in range(plan.k):
        train, test = plan.split(i)
        beta, _, _ = _ols(X[train], y[train], cov=False)
        p = X[test] @ beta
        pred[test] = p
        r = y[test] - p
        fold_mse.append(float(r @ r / len(r)))
    return fold_mse, pred


def evaluate_fit(g: Dag, d: Dataset, k: int = 10, target: str = "Utility", seed: int = 0) -> FitReport:
    """k-fold MSE of regressing ``target`` on its parents in ``g``.

    The baseline uses every other column as a regressor under the same
    fold assignment. ``pearson`` correlates the pooled held-out predictions
    of the graph model with the observed target.
    """
    parents = tuple(sorted(g.parents(target)))
    if d.column_schema(target).is_categorical:
        raise DataError(f"target {target!r} must be continuous")
    if k < 2:
        raise ValueError("k must be at least 2")
    plan = kfold_split(d.n, k, seed)
    fold_mse, pred = _cv_predict(d, target, parents, plan)
    others = [v for v in d.names if v != target]
    base_mse, _ = _cv_predict(d, target, others, plan)
    try:
        r = pearson(pred, d.columns[target])
    except ZeroVariance:
        # intercept-only predictions are constant within a fold but not
        # across folds; exactly constant only in degenerate cases
        r = 0.0
    return FitReport(
        target,
        k,
        float(np.mean(fold_mse)),
        tuple(fold_mse),
        r,
        float(np.mean(base_mse)),
        tuple(base_mse),
        parents,
    )


def variable_correlations(d: Dataset, target: str = "Utility") -> dict[str, float]:
    """Pearson correlation of each column (indicators for categoricals) with ``target``."""
    y = d.columns[target]
    out = {}
    for v in d.names:
        if v == target:
            continue
        names, block = design_columns(d, [v])
        for j, name in enumerate(names):
            try:
                out[name] = pearson(block[:, j], y)
            except ZeroVariance:
                out[name] = 0.0
    return out
