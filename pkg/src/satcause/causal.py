"""Backdoor identification, regression effect estimation and refutation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import norm

from .dag import Dag, d_connected_nodes, d_separated
from .dataset import Dataset, Predicate, _fmt, design_columns, filter_rows, normalize_standard_score
from .errors import (
    DataError,
    EmptyStratum,
    NotIdentifiable,
    QueryError,
    SingularDesign,
    TooFewRows,
    UnknownVariable,
)

ATE, CATE, ACATE = "ATE", "CATE", "ACATE"

RANDOM_COMMON_CAUSE = "RandomCommonCause"
PLACEBO_TREATMENT = "PlaceboTreatment"
DATA_SUBSET = "DataSubset"
REFUTATIONS = (RANDOM_COMMON_CAUSE, PLACEBO_TREATMENT, DATA_SUBSET)

ALPHA = 0.05
SUBSET_FRACTION = 0.8


@dataclass(frozen=True)
class QuerySpec:
    """A single effect query.

    ``a`` and ``b`` are numbers for continuous treatments and category
    labels for categorical ones. ``condition`` is a :class:`Predicate` for
    CATE and a variable name for ACATE.
    """

    kind: str
    treatment: str
    outcome: str
    a: float | str
    b: float | str
    condition: Predicate | str | None = None
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in (ATE, CATE, ACATE):
            raise QueryError(f"unknown query kind {self.kind!r}")
        if self.kind == CATE and not isinstance(self.condition, Predicate):
            raise QueryError("CATE needs a row predicate")
        if self.kind == ACATE and not isinstance(self.condition, str):
            raise QueryError("ACATE needs a conditioning variable")
        if self.kind == ATE and self.condition is not None:
            raise QueryError("ATE takes no condition")
        if self.treatment == self.outcome:
            raise QueryError("treatment and outcome must differ")

    def __str__(self) -> str:
        args = [self.treatment, self.outcome]
        if self.condition is not None:
            args.append(str(self.condition))
        args += [_value_str(self.a), _value_str(self.b)]
        text = f"{self.kind}({', '.join(args)})"
        return text + " normalized" if self.normalized else text


def _value_str(v) -> str:
    return v if isinstance(v, str) else _fmt(v)


@dataclass(frozen=True)
class BackdoorSet:
    variables: tuple[str, ...]
    treatment: str
    outcome: str


@dataclass(frozen=True)
class LinearModel:
    response: str
    regressors: tuple[str, ...]
    coefficients: np.ndarray  # intercept first
    covariance: np.ndarray
    residual_variance: float
    n: int

    @property
    def intercept(self) -> float:
        return float(self.coefficients[0])

    def coef(self, name: str) -> float:
        return float(self.coefficients[1 + self.regressors.index(name)])

    def stderr(self, name: str) -> float:
        i = 1 + self.regressors.index(name)
        return float(math.sqrt(self.covariance[i, i]))

    def as_dict(self) -> dict[str, float]:
        out = {"(intercept)": self.intercept}
        out.update({r: self.coef(r) for r in self.regressors})
        return out


@dataclass(frozen=True)
class RefutationResult:
    kind: str
    new_estimate: float
    p_value: float
    passed: bool
    run_std: float = 0.0
    runs: int = 0

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "new_estimate": self.new_estimate,
            "p_value": self.p_value,
            "passed": self.passed,
            "run_std": self.run_std,
            "runs": self.runs,
        }


@dataclass
class EffectEstimate:
    query: QuerySpec
    value: float
    stderr: float
    backdoor: BackdoorSet | None  # None when no directed path exists
    model: LinearModel | None
    refutations: list[RefutationResult] = field(default_factory=list)

    @property
    def no_effect(self) -> bool:
        return self.backdoor is None

    @property
    def refuted(self) -> bool:
        return any(not r.passed for r in self.refutations)

    def to_json(self) -> dict:
        return {
            "query": str(self.query),
            "value": self.value,
            "stderr": self.stderr,
            "backdoor_set": None if self.backdoor is None else list(self.backdoor.variables),
            "coefficients": {} if self.model is None else self.model.as_dict(),
            "refutations": [r.to_json() for r in self.refutations],
        }


# -- identification ----------------------------------------------------------


def find_backdoor_set(
    g: Dag, treatment: str, outcome: str, forced: Iterable[str] = ()
) -> BackdoorSet | None:
    """Smallest set blocking every backdoor path from treatment to outcome.

    Returns None when there is no directed path treatment -> outcome (the
    effect is zero). Candidates come from the non-descendants of the
    treatment that are d-connected to the treatment or the outcome, and are
    tried by increasing size, lexicographically within a size, on the graph
    with the treatment's outgoing edges removed. ``forced`` variables are
    always part of the set.
    """
    g.parents(treatment)
    g.parents(outcome)
    if treatment == outcome:
        raise ValueError("treatment and outcome must differ")
    if not g.has_directed_path(treatment, outcome):
        return None
    forced = frozenset(forced)
    desc = g.descendants(treatment)
    for w in forced:
        g.parents(w)
        if w in (treatment, outcome) or w in desc:
            raise NotIdentifiable(f"{w!r} cannot be adjusted for when estimating {treatment} -> {outcome}")
    near = d_connected_nodes(g, treatment) | d_connected_nodes(g, outcome)
    eligible = sorted(
        v
        for v in g.nodes
        if v not in (treatment, outcome) and v not in desc and v in near and v not in forced
    )
    bg = g.backdoor_graph(treatment)
    for size in range(len(eligible) + 1):
        for cand in combinations(eligible, size):
            z = forced.union(cand)
            if d_separated(bg, treatment, outcome, z):
                return BackdoorSet(tuple(sorted(z)), treatment, outcome)
    raise NotIdentifiable(f"no backdoor set for {treatment} -> {outcome}")


def is_backdoor_set(g: Dag, treatment: str, outcome: str, z: Iterable[str]) -> bool:
    z = frozenset(z)
    if z & g.descendants(treatment) or treatment in z or outcome in z:
        return False
    return d_separated(g.backdoor_graph(treatment), treatment, outcome, z)


# -- regression --------------------------------------------------------------


def _ols(X: np.ndarray, y: np.ndarray, *, cov: bool = True) -> tuple[np.ndarray, np.ndarray | None, float]:
    """Least squares via column-pivoted QR.

    ``X`` must already contain the intercept column. Returns coefficients,
    their covariance (None when ``cov`` is false) and the residual variance
    RSS / (n - p).
    """
    n, p = X.shape
    if n <= p:
        raise TooFewRows(f"{n} rows for {p} coefficients")
    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(R))
    if diag[-1] <= 1e-10 * diag[0]:
        raise SingularDesign("design matrix is rank deficient")
    qty = Q.T @ y
    bp = scipy.linalg.solve_triangular(R, qty, check_finite=False)
    beta = np.empty(p)
    beta[piv] = bp
    if not cov:
        return beta, None, float("nan")
    resid = y - X @ beta
    rss = float(resid @ resid)
    s2 = rss / (n - p)
    Rinv = scipy.linalg.solve_triangular(R, np.eye(p), check_finite=False)
    covp = s2 * (Rinv @ Rinv.T)
    full = np.empty((p, p))
    full[np.ix_(piv, piv)] = covp
    return beta, full, s2


def _design(d: Dataset, regressors: Sequence[str]) -> tuple[list[str], np.ndarray]:
    names, block = design_columns(d, regressors)
    X = np.column_stack([np.ones(d.n), block]) if names else np.ones((d.n, 1))
    return names, X


def fit_ols(response: str, regressors: Sequence[str], d: Dataset) -> LinearModel:
    """Regress ``response`` on ``regressors`` plus an intercept.

    Categorical regressors are expanded into indicator columns named
    ``<column>=<category>``.
    """
    if d.column_schema(response).is_categorical:
        raise DataError(f"response {response!r} must be continuous")
    if d.n <= len(regressors) + 1:
        raise TooFewRows(f"{d.n} rows cannot support {len(regressors)} regressors")
    names, X = _design(d, regressors)
    beta, cov, s2 = _ols(X, d.columns[response])
    return LinearModel(response, tuple(names), beta, cov, s2, d.n)


# -- estimation --------------------------------------------------------------


def _check_vars(q: QuerySpec, g: Dag, d: Dataset) -> None:
    names = [q.treatment, q.outcome]
    if q.kind == ACATE:
        names.append(q.condition)
    elif q.kind == CATE:
        names.append(q.condition.column)
    for v in names:
        if v not in g.nodes or v not in d:
            raise UnknownVariable(v)
    if d.column_schema(q.outcome).is_categorical:
        raise QueryError(f"outcome {q.outcome!r} must be continuous")
    tc = d.column_schema(q.treatment)
    for v in (q.a, q.b):
        if tc.is_categorical:
            if not isinstance(v, str) or v not in tc.categories:
                raise QueryError(f"{v!r} is not a category of {q.treatment!r}")
        elif isinstance(v, str):
            raise QueryError(f"treatment {q.treatment!r} is continuous; got label {v!r}")


def query_data(q: QuerySpec, d: Dataset) -> Dataset:
    """The rows and scale a query is evaluated on."""
    if q.normalized:
        d, _ = normalize_standard_score(d)
    if q.kind == CATE:
        d = filter_rows(d, q.condition)
    return d


def _contrast_vector(q: QuerySpec, d: Dataset, names: list[str]) -> np.ndarray:
    """Weights w such that the effect equals w @ beta."""
    w = np.zeros(len(names) + 1)
    tc = d.column_schema(q.treatment)
    if tc.is_categorical:
        for label, sign in ((q.a, 1.0), (q.b, -1.0)):
            if label != tc.categories[0]:
                w[1 + names.index(f"{q.treatment}={label}")] += sign
    else:
        w[1 + names.index(q.treatment)] = float(q.a) - float(q.b)
    return w


@dataclass
class _Problem:
    """Numeric form of one estimate: y ~ X, effect = w @ beta."""

    X: np.ndarray
    y: np.ndarray
    w: np.ndarray
    treat_cols: list[int]

    def effect(self, X=None, y=None) -> float:
        beta, _, _ = _ols(self.X if X is None else X, self.y if y is None else y, cov=False)
        return float(self.w @ beta[: len(self.w)])


def _problem(q: QuerySpec, d: Dataset, adjust: Sequence[str]) -> tuple[_Problem, list[str]]:
    names, X = _design(d, [q.treatment, *adjust])
    w = _contrast_vector(q, d, names)
    tc = d.column_schema(q.treatment)
    width = len(tc.categories) - 1 if tc.is_categorical else 1
    return _Problem(X, d.columns[q.outcome], w, list(range(1, 1 + width))), names


def estimate_effect(q: QuerySpec, g: Dag, d: Dataset) -> EffectEstimate:
    """Identify a backdoor set in ``g`` and estimate the effect by regression.

    The estimate is (a - b) times the treatment coefficient for a continuous
    treatment, or the difference of the two indicator coefficients for a
    categorical one (the reference category's coefficient is 0).
    """
    _check_vars(q, g, d)
    data = query_data(q, d)
    forced = (q.condition,) if q.kind == ACATE else ()
    bs = find_backdoor_set(g, q.treatment, q.outcome, forced)
    if bs is None or q.a == q.b:
        return EffectEstimate(q, 0.0, 0.0, bs, None)
    model = fit_ols(q.outcome, [q.treatment, *bs.variables], data)
    w = _contrast_vector(q, data, list(model.regressors))
    value = float(w @ model.coefficients)
    se = float(math.sqrt(max(w @ model.covariance @ w, 0.0)))
    return EffectEstimate(q, value, se, bs, model)


def adjusted_estimate(q: QuerySpec, d: Dataset, adjust: Sequence[str]) -> EffectEstimate:
    """Estimate with a caller-chosen adjustment set (no identification step)."""
    data = query_data(q, d)
    model = fit_ols(q.outcome, [q.treatment, *adjust], data)
    w = _contrast_vector(q, data, list(model.regressors))
    value = float(w @ model.coefficients)
    se = float(math.sqrt(max(w @ model.covariance @ w, 0.0)))
    return EffectEstimate(q, value, se, BackdoorSet(tuple(adjust), q.treatment, q.outcome), model)


# -- refutation --------------------------------------------------------------


def _two_sided_p(x: float, mean: float, sd: float) -> float:
    if sd <= 0 or not math.isfinite(sd):
        return 1.0 if math.isclose(x, mean, rel_tol=1e-12, abs_tol=1e-12) else 0.0
    return float(2 * norm.sf(abs(x - mean) / sd))


def refute(
    e: EffectEstimate,
    g: Dag,
    d: Dataset,
    kind: str,
    runs: int = 100,
    seed: int = 0,
) -> RefutationResult:
    """Monte-Carlo refutation of an estimate.

    * RandomCommonCause: add an independent N(0, 1) column to the adjustment
      set; the estimate should not move.
    * PlaceboTreatment: replace the treatment by independent standard-normal
      noise (shuffled labels for a categorical treatment); the estimate
      should vanish.
    * DataSubset: re-estimate on random 80% subsets; the estimate should not
      move.

    A normal distribution is fitted to the run estimates. The p-value is the
    two-sided tail probability of the original estimate (of 0 for the
    placebo) under that distribution. Run ``r`` draws from a generator
    spawned from ``seed`` with key ``(kind, r)``, so results do not depend
    on run order and never replay the root stream of ``seed``.
    """
    if kind not in REFUTATIONS:
        raise ValueError(f"unknown refutation {kind!r}")
    if runs < 20:
        raise ValueError("refutation needs at least 20 runs")
    q = e.query
    if e.no_effect or q.a == q.b:
        return RefutationResult(kind, 0.0, 1.0, True, 0.0, runs)
    data = query_data(q, d)
    prob, _ = _problem(q, data, e.backdoor.variables)
    n = len(prob.y)
    tc = data.column_schema(q.treatment)
    k_id = REFUTATIONS.index(kind)
    est = np.empty(runs)
    for r in range(runs):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k_id, r)))
        if kind == RANDOM_COMMON_CAUSE:
            X = np.column_stack([prob.X, rng.standard_normal(n)])
            est[r] = prob.effect(X)
        elif kind == PLACEBO_TREATMENT:
            X = prob.X.copy()
            if tc.is_categorical:
                X[:, prob.treat_cols] = X[rng.permutation(n)][:, prob.treat_cols]
            else:
                X[:, prob.treat_cols[0]] = rng.standard_normal(n)
            est[r] = prob.effect(X)
        else:
            rows = np.sort(rng.choice(n, size=int(SUBSET_FRACTION * n), replace=False))
            est[r] = prob.effect(prob.X[rows], prob.y[rows])
    mean = float(est.mean())
    sd = float(est.std(ddof=1))
    target = 0.0 if kind == PLACEBO_TREATMENT else e.value
    p = _two_sided_p(target, mean, sd)
    return RefutationResult(kind, mean, p, p >= ALPHA, sd, runs)


def refute_all(e: EffectEstimate, g: Dag, d: Dataset, runs: int = 100, seed: int = 0) -> EffectEstimate:
    e.refutations = [refute(e, g, d, k, runs, seed) for k in REFUTATIONS]
    return e


# -- stratified oracle -------------------------------------------------------


def stratified_estimand(q: QuerySpec, z: BackdoorSet | Iterable[str], d: Dataset) -> float:
    """Sum over strata z of (E[Y | X=a, z] - E[Y | X=b, z]) * P(z), by grouping rows."""
    zs = list(z.variables if isinstance(z, BackdoorSet) else z)
    for v in [q.treatment, *zs]:
        if len(np.unique(d[v])) > 10:
            raise ValueError(f"{v!r} takes more than 10 distinct values")
    tc = d.column_schema(q.treatment)
    if tc.is_categorical:
        x = d.columns[q.treatment]
        xa, xb = tc.categories.index(q.a), tc.categories.index(q.b)
    else:
        x = d.columns[q.treatment]
        xa, xb = float(q.a), float(q.b)
    y = d.columns[q.outcome]
    if zs:
        keys = np.column_stack([d.columns[v] for v in zs])
        strata, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
    else:
        strata, inverse = np.zeros((1, 0)), np.zeros(d.n, dtype=np.int64)
    total = 0.0
    for s in range(len(strata)):
        rows = inverse == s
        ya = y[rows & (x == xa)]
        yb = y[rows & (x == xb)]
        if len(ya) == 0 or len(yb) == 0:
            raise EmptyStratum(tuple(strata[s].tolist()))
        total += (ya.mean() - yb.mean()) * rows.sum() / d.n
    return float(total)
