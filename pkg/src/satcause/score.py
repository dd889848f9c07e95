"""Decomposable linear-Gaussian BIC.

For a node regressed on its parents (plus intercept) by least squares,

    local = -(n/2) * (ln(2*pi*s2) + 1) - (p/2) * ln(n),   s2 = RSS / n,

with p = number of regressor columns + 2 (slopes, intercept, variance).
Categorical parents enter through their indicator columns; a categorical
child contributes one Gaussian term per indicator column. Higher is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dag import Dag
from .dataset import Dataset
from .errors import SingularDesign, TooFewRows, UnknownColumn

_REL_VAR_TOL = 1e-10
_COND_TOL = 1e-10


@dataclass(frozen=True)
class LocalScore:
    node: str
    parents: frozenset[str]
    value: float


class BicScorer:
    """BIC evaluator bound to one dataset, memoized by (node, parent set).

    Sufficient statistics (means and the centered cross-product matrix of
    all encoded columns) are computed once, so each local score costs one
    small linear solve regardless of n.
    """

    def __init__(self, d: Dataset, *, cache: bool = True):
        self.n = d.n
        self._groups: dict[str, list[int]] = {}
        blocks = []
        j = 0
        for c in d.schema:
            if c.is_categorical:
                codes = d.columns[c.name]
                cols = [(codes == k).astype(np.float64) for k in range(1, len(c.categories))]
            else:
                cols = [d.columns[c.name]]
            self._groups[c.name] = list(range(j, j + len(cols)))
            blocks.extend(cols)
            j += len(cols)
        X = np.column_stack(blocks)
        Xc = X - X.mean(axis=0)
        self._gram = Xc.T @ Xc
        self._cache: dict[tuple[str, frozenset[str]], LocalScore] | None = {} if cache else None

    def _cols(self, name: str) -> list[int]:
        try:
            return self._groups[name]
        except KeyError:
            raise UnknownColumn(name) from None

    def local(self, node: str, parents: Iterable[str] = ()) -> LocalScore:
        parents = frozenset(parents)
        key = (node, parents)
        if self._cache is not None:
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        res = LocalScore(node, parents, self._compute(node, parents))
        if self._cache is not None:
            self._cache.setdefault(key, res)
        return res

    def _compute(self, node: str, parents: frozenset[str]) -> float:
        if node in parents:
            raise ValueError(f"{node!r} cannot be its own parent")
        xs = [j for p in sorted(parents) for j in self._cols(p)]
        ys = self._cols(node)
        n = self.n
        q = len(xs)
        if n <= q + 1:
            raise TooFewRows(f"{n} rows cannot support {q} regressors for {node!r}")
        G = self._gram
        if q:
            Sxx = G[np.ix_(xs, xs)]
            scale = np.sqrt(np.diag(Sxx))
            if np.any(scale == 0):
                raise SingularDesign(f"constant parent column for {node!r}")
            R = Sxx / np.outer(scale, scale)
            ev = np.linalg.eigvalsh(R)
            if ev[0] <= _COND_TOL * ev[-1]:
                raise SingularDesign(f"collinear parents {sorted(parents)} for {node!r}")
        total = 0.0
        penalty = 0.5 * (q + 2) * math.log(n)
        for y in ys:
            syy = G[y, y]
            if q:
                sxy = G[xs, y]
                beta = np.linalg.solve(Sxx, sxy)
                rss = syy - sxy @ beta
            else:
                rss = syy
            if not rss > _REL_VAR_TOL * syy:
                raise SingularDesign(f"zero residual variance for {node!r} given {sorted(parents)}")
            s2 = rss / n
            total += -0.5 * n * (math.log(2 * math.pi * s2) + 1) - penalty
        return float(total)

    def score(self, g: Dag) -> float:
        return float(sum(self.local(v, g.parents(v)).value for v in g.nodes))


def local_score(node: str, parents: Iterable[str], d: Dataset) -> LocalScore:
    return BicScorer(d, cache=False).local(node, parents)


def bic_score(g: Dag, d: Dataset, scorer: BicScorer | None = None) -> float:
    if set(g.nodes) != set(d.names):
        raise ValueError("graph nodes must equal dataset columns")
    return (scorer or BicScorer(d)).score(g)
