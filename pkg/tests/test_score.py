import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satcause.dag import Dag
from satcause.dataset import ColumnSchema, Dataset
from satcause.errors import SingularDesign, TooFewRows
from satcause.score import BicScorer, bic_score, local_score


def ds(**cols) -> Dataset:
    return Dataset(tuple(ColumnSchema(k) for k in cols), {k: np.asarray(v, float) for k, v in cols.items()})


def direct_bic(y, X):
    """Oracle: least squares on the raw design, no sufficient statistics."""
    n = len(y)
    Z = np.column_stack([np.ones(n), X]) if X is not None else np.ones((n, 1))
    beta = np.linalg.lstsq(Z, y, rcond=None)[0]
    r = y - Z @ beta
    s2 = r @ r / n
    p = Z.shape[1] + 1
    return -(n / 2) * (math.log(2 * math.pi * s2) + 1) - (p / 2) * math.log(n)


def test_hand_value_no_parents():
    v = local_score("Y", (), ds(Y=[1, 2, 3])).value
    assert v == pytest.approx(-(3 / 2) * (math.log(2 * math.pi * 2 / 3) + 1) - math.log(3), abs=1e-12)


def test_constant_column_is_singular():
    with pytest.raises(SingularDesign):
        local_score("Y", (), ds(Y=[0, 0, 0, 0]))


def test_deterministic_child_is_singular():
    x = np.arange(10.0)
    with pytest.raises(SingularDesign):
        local_score("Y", {"X"}, ds(X=x, Y=x + 3))


def test_collinear_parents():
    rng = np.random.default_rng(0)
    a = rng.normal(size=50)
    with pytest.raises(SingularDesign):
        local_score("Y", {"A", "B"}, ds(A=a, B=2 * a, Y=rng.normal(size=50)))


def test_too_few_rows():
    with pytest.raises(TooFewRows):
        local_score("Y", {"A", "B"}, ds(A=[1, 2, 4], B=[0, 1, 0], Y=[3, 1, 2]))


@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_matches_direct_regression(seed, q):
    rng = np.random.default_rng(seed)
    n = 40
    X = rng.normal(size=(n, q)) * rng.uniform(0.1, 10, size=q)
    y = X @ rng.normal(size=q) + rng.normal(size=n) + 5
    cols = {f"X{i}": X[:, i] for i in range(q)}
    d = ds(Y=y, **cols)
    got = local_score("Y", set(cols), d).value
    assert got == pytest.approx(direct_bic(y, X if q else None), rel=1e-9, abs=1e-7)


def test_categorical_parent_uses_indicators():
    rng = np.random.default_rng(1)
    n = 300
    c = rng.integers(0, 3, size=n)
    y = np.array([0.0, 2.0, -1.0])[c] + rng.normal(size=n)
    schema = (ColumnSchema("C", "categorical", ("a", "b", "c")), ColumnSchema("Y"))
    d = Dataset(schema, {"C": c, "Y": y})
    dummies = np.column_stack([(c == 1), (c == 2)]).astype(float)
    assert local_score("Y", {"C"}, d).value == pytest.approx(direct_bic(y, dummies), rel=1e-10)


def test_empty_graph_is_sum_of_marginals():
    rng = np.random.default_rng(2)
    d = ds(A=rng.normal(size=100), B=rng.normal(size=100), C=rng.normal(size=100))
    g = Dag(("A", "B", "C"))
    assert bic_score(g, d) == pytest.approx(sum(local_score(v, (), d).value for v in "ABC"), abs=1e-10)


def test_true_edge_scores_higher():
    rng = np.random.default_rng(3)
    x = rng.normal(size=1000)
    d = ds(X=x, Y=2 * x + rng.normal(size=1000))
    empty = Dag(("X", "Y"))
    edge = Dag(("X", "Y"), frozenset({("X", "Y")}))
    assert bic_score(edge, d) > bic_score(empty, d)
    delta = bic_score(edge, d) - bic_score(empty, d)
    assert delta == pytest.approx(local_score("Y", {"X"}, d).value - local_score("Y", (), d).value, abs=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_decomposability_and_cache_transparency(seed):
    rng = np.random.default_rng(seed)
    n = 200
    a = rng.normal(size=n)
    b = a + rng.normal(size=n)
    c = b - a + rng.normal(size=n)
    e = rng.normal(size=n)
    d = ds(A=a, B=b, C=c, E=e)
    base = Dag.from_edges([("A", "B"), ("B", "C")], nodes="ABCE")
    cached = BicScorer(d)
    plain = BicScorer(d, cache=False)
    for u, v in [("A", "C"), ("E", "C"), ("E", "A")]:
        g2 = base.with_edges([(u, v)])
        delta = cached.score(g2) - cached.score(base)
        local = cached.local(v, g2.parents(v)).value - cached.local(v, base.parents(v)).value
        assert abs(delta - local) < 1e-10
        assert cached.score(g2) == plain.score(g2)


def test_noise_parent_rarely_helps():
    wins = 0
    trials = 40
    for seed in range(trials):
        rng = np.random.default_rng(seed)
        n = 500
        d = ds(Y=rng.normal(size=n), N=rng.normal(size=n))
        if local_score("Y", {"N"}, d).value <= local_score("Y", (), d).value:
            wins += 1
    assert wins / trials >= 0.95
