import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_d_separated, random_dag
from satcause.dag import (
    Dag,
    EdgeConstraints,
    Edit,
    EditRejected,
    Reason,
    apply_edit,
    d_separated,
    default_sat_constraints,
    to_dot,
)
from satcause.dataset import SAT_SCHEMA
from satcause.errors import CycleError, CyclicWhitelist, UnknownColumn, UnknownNode

OVERCONTROL_EDGES = [
    ("LBD", "Propagation"),
    ("LBD", "LastTouch"),
    ("Propagation", "LastTouch"),
    ("Propagation", "Activity"),
    ("LastTouch", "Activity"),
]


@st.composite
def dags(draw, max_nodes=6):
    n = draw(st.integers(1, max_nodes))
    seed = draw(st.integers(0, 2**32 - 1))
    p = draw(st.floats(0.0, 1.0))
    nodes, edges = random_dag(np.random.default_rng(seed), n, p)
    return Dag(tuple(nodes), frozenset(edges))


# -- construction ------------------------------------------------------------


def test_cycle_rejected():
    with pytest.raises(CycleError):
        Dag.from_edges([("A", "B"), ("B", "C"), ("C", "A")])
    with pytest.raises(CycleError):
        Dag.from_edges([("A", "A")])


def test_unknown_node():
    with pytest.raises(UnknownNode):
        Dag(("A",), frozenset({("A", "B")}))
    g = Dag.from_edges([("A", "B")])
    with pytest.raises(UnknownNode):
        g.parents("Z")
    with pytest.raises(UnknownNode):
        d_separated(g, "A", "Z")


def test_json_round_trip():
    g = Dag.from_edges(OVERCONTROL_EDGES)
    doc = json.loads(g.dumps())
    assert doc["edges"] == sorted([list(e) for e in OVERCONTROL_EDGES])
    assert Dag.from_json(doc) == g


def test_topological_order_respects_edges():
    g = Dag.from_edges(OVERCONTROL_EDGES)
    order = g.topological_order()
    pos = {v: i for i, v in enumerate(order)}
    assert all(pos[u] < pos[v] for u, v in g.edges)


# -- constraints -------------------------------------------------------------


def test_default_constraints():
    c = default_sat_constraints(SAT_SCHEMA)
    names = [s.name for s in SAT_SCHEMA]
    for x in names:
        if x != "Utility":
            assert ("Utility", x) in c.blacklist
    assert ("Activity", "LBD") in c.blacklist
    assert ("Branching", "LBD") not in c.blacklist
    assert ("Restart", "Size") not in c.blacklist
    assert ("Size", "Time") in c.blacklist
    assert ("Restart", "Branching") in c.blacklist
    assert ("LBD", "Size") in c.blacklist
    assert ("Propagation", "Utility") not in c.blacklist
    assert c.whitelist == frozenset()


def test_default_constraints_need_utility():
    with pytest.raises(UnknownColumn):
        default_sat_constraints([s for s in SAT_SCHEMA if s.name != "Utility"])


def test_constraint_invariants():
    with pytest.raises(CyclicWhitelist):
        EdgeConstraints(frozenset({("A", "B"), ("B", "A")}))
    with pytest.raises(ValueError):
        EdgeConstraints(frozenset({("A", "B")}), frozenset({("A", "B")}))


# -- edits -------------------------------------------------------------------


def test_add_then_reverse_add_is_cycle():
    g = Dag(("A", "B"))
    g = apply_edit(g, Edit("add", "A", "B"))
    with pytest.raises(EditRejected) as ei:
        apply_edit(g, Edit("add", "B", "A"))
    assert ei.value.reason is Reason.CYCLE


def test_remove_whitelisted():
    c = EdgeConstraints(frozenset({("A", "B")}))
    g = Dag.from_edges([("A", "B")])
    with pytest.raises(EditRejected) as ei:
        apply_edit(g, Edit("remove", "A", "B"), c)
    assert ei.value.reason is Reason.WHITELIST


def test_reverse_on_chain():
    g = Dag.from_edges([("A", "B"), ("B", "C")])
    h = apply_edit(g, Edit("reverse", "A", "B"))
    assert h.edges == {("B", "A"), ("B", "C")}


def test_edit_reasons():
    g = Dag.from_edges([("A", "B"), ("B", "C")])
    c = EdgeConstraints(blacklist=frozenset({("A", "C"), ("C", "B")}))
    cases = [
        (Edit("add", "A", "B"), Reason.EDGE_EXISTS),
        (Edit("add", "A", "C"), Reason.BLACKLIST),
        (Edit("add", "C", "A"), Reason.CYCLE),
        (Edit("remove", "A", "C"), Reason.NO_SUCH_EDGE),
        (Edit("reverse", "B", "C"), Reason.BLACKLIST),
    ]
    for e, reason in cases:
        with pytest.raises(EditRejected) as ei:
            apply_edit(g, e, c)
        assert ei.value.reason is reason, e
    g2 = Dag.from_edges([("A", "B"), ("B", "C"), ("A", "C")])
    with pytest.raises(EditRejected) as ei:
        apply_edit(g2, Edit("reverse", "A", "C"))
    assert ei.value.reason is Reason.CYCLE


@given(dags(5), st.integers(0, 2**32 - 1))
def test_apply_edit_keeps_invariants(g, seed):
    rng = np.random.default_rng(seed)
    nodes = list(g.nodes)
    pairs = [(u, v) for u in nodes for v in nodes if u != v]
    if not pairs:
        return
    wl = frozenset(e for e in g.edges if rng.random() < 0.3)
    bl = frozenset(p for p in pairs if p not in g.edges and p not in wl and rng.random() < 0.3)
    c = EdgeConstraints(wl, bl)
    for _ in range(30):
        u, v = pairs[rng.integers(len(pairs))]
        kind = ("add", "remove", "reverse")[rng.integers(3)]
        try:
            g = apply_edit(g, Edit(kind, u, v), c)
        except EditRejected:
            continue
        assert c.allows(g)


# -- d-separation ------------------------------------------------------------


def test_chain_and_collider():
    chain = Dag.from_edges([("A", "B"), ("B", "C")])
    assert d_separated(chain, "A", "C", {"B"})
    assert not d_separated(chain, "A", "C")
    coll = Dag.from_edges([("A", "B"), ("C", "B")])
    assert d_separated(coll, "A", "C", set())
    assert not d_separated(coll, "A", "C", {"B"})
    coll2 = Dag.from_edges([("A", "B"), ("C", "B"), ("B", "D")])
    assert not d_separated(coll2, "A", "C", {"D"})


def test_lbd_blocks_backdoor():
    g = Dag.from_edges([("LBD", "Propagation"), ("LBD", "LastTouch"), ("Propagation", "LastTouch")])
    h = g.without_edges([("Propagation", "LastTouch")])
    assert d_separated(h, "Propagation", "LastTouch", {"LBD"})
    assert not d_separated(h, "Propagation", "LastTouch")


def test_bad_queries():
    g = Dag.from_edges([("A", "B")])
    with pytest.raises(ValueError):
        d_separated(g, "A", "A")
    with pytest.raises(ValueError):
        d_separated(g, "A", "B", {"A"})


@given(dags(5), st.data())
def test_d_separation_matches_brute_force(g, data):
    if len(g.nodes) < 2:
        return
    x, y = data.draw(st.sampled_from(list(itertools.permutations(g.nodes, 2))))
    rest = [v for v in g.nodes if v not in (x, y)]
    s = data.draw(st.sets(st.sampled_from(rest))) if rest else set()
    expected = brute_d_separated(g.nodes, g.edges, x, y, s)
    assert d_separated(g, x, y, s) == expected
    assert d_separated(g, y, x, s) == expected


# -- descendants -------------------------------------------------------------


def test_descendants_examples():
    chain = Dag.from_edges([("A", "B"), ("B", "C")])
    assert chain.descendants("A") == {"B", "C"}
    assert chain.descendants("C") == frozenset()
    fig = Dag.from_edges(OVERCONTROL_EDGES)
    assert fig.descendants("Propagation") == {"LastTouch", "Activity"}
    assert fig.descendants("LBD") == {"Propagation", "LastTouch", "Activity"}
    assert fig.descendants("Activity") == frozenset()


@given(dags(7))
def test_descendants_transitive(g):
    for x in g.nodes:
        dx = g.descendants(x)
        assert x not in dx
        for y in dx:
            assert g.descendants(y) <= dx
            assert x in g.ancestors(y)


# -- DOT ---------------------------------------------------------------------


def test_dot():
    g = Dag.from_edges([("A", "B")])
    text = to_dot(g)
    assert "A -> B;" in text
    assert text.startswith("digraph")
    assert to_dot(g) == text
    empty = to_dot(Dag(("X", "Y")))
    assert "->" not in empty and "X;" in empty and "Y;" in empty


def test_dot_edge_order_and_quoting():
    g = Dag.from_edges([("b", "c"), ("a", "c"), ("a", "b")], nodes=["c", "b", "a", "Restart=Luby"])
    lines = to_dot(g).splitlines()
    assert lines[1:5] == ["  c;", "  b;", "  a;", '  "Restart=Luby";']
    assert [ln for ln in lines if "->" in ln] == ["  a -> b;", "  a -> c;", "  b -> c;"]
