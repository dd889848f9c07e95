"""Constrained hill-climbing and k-fold majority-vote graph averaging."""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .dag import Dag, Edge, EdgeConstraints, Edit, _find_cycle, edit_problem
from .dataset import Dataset, kfold_split
from .errors import CycleError, CyclicWhitelist
from .score import BicScorer

log = logging.getLogger(__name__)

# Improvements below this (in nats) are treated as float noise.
MIN_GAIN = 1e-9


@dataclass(frozen=True)
class SearchTrace:
    steps: tuple[tuple[Edit, float], ...]
    initial_score: float
    final_score: float


def _candidates(g: Dag):
    """Every add/remove/reverse edit, ordered by (kind, u, v)."""
    nodes = sorted(g.nodes)
    for u in nodes:
        for v in nodes:
            if u != v and not g.adjacent(u, v):
                yield Edit("add", u, v)
    for u, v in sorted(g.edges):
        yield Edit("remove", u, v)
    for u, v in sorted(g.edges):
        yield Edit("reverse", u, v)


def _gain(g: Dag, e: Edit, scorer: BicScorer) -> float:
    u, v = e.u, e.v
    pv = g.parents(v)
    base_v = scorer.local(v, pv).value
    if e.kind == "add":
        return scorer.local(v, pv | {u}).value - base_v
    delta = scorer.local(v, pv - {u}).value - base_v
    if e.kind == "reverse":
        pu = g.parents(u)
        delta += scorer.local(u, pu | {v}).value - scorer.local(u, pu).value
    return delta


def _apply(g: Dag, e: Edit) -> Dag:
    edges = set(g.edges)
    if e.kind == "add":
        edges.add((e.u, e.v))
    elif e.kind == "remove":
        edges.discard((e.u, e.v))
    else:
        edges.discard((e.u, e.v))
        edges.add((e.v, e.u))
    return Dag(g.nodes, frozenset(edges))


def best_edit(g: Dag, c: EdgeConstraints, scorer: BicScorer) -> tuple[Edit | None, float]:
    """Highest-gain valid edit; ties keep the first in enumeration order."""
    best, best_gain = None, 0.0
    for e in _candidates(g):
        if edit_problem(g, e, c) is not None:
            continue
        gain = _gain(g, e, scorer)
        if best is None or gain > best_gain:
            best, best_gain = e, gain
    return best, best_gain


def hill_climb(
    c: EdgeConstraints, d: Dataset, seed: int = 0, scorer: BicScorer | None = None
) -> tuple[Dag, SearchTrace]:
    """Steepest-ascent hill climbing from the whitelist-only graph.

    Each round scores every valid single-edge edit and moves to the best one
    if it strictly improves BIC; the search stops at a local optimum. The
    enumeration is deterministic, so ``seed`` does not influence the result.
    """
    scorer = scorer or BicScorer(d)
    try:
        g = Dag(tuple(d.names), c.whitelist)
    except CycleError:
        raise CyclicWhitelist() from None
    score = scorer.score(g)
    initial = score
    steps = []
    while True:
        e, gain = best_edit(g, c, scorer)
        if e is None or not gain > MIN_GAIN:
            break
        g = _apply(g, e)
        new = scorer.score(g)
        if not new > score:
            break
        score = new
        steps.append((e, score))
        log.debug("step %d: %s -> %.6f", len(steps), e, score)
    return g, SearchTrace(tuple(steps), initial, score)


@dataclass
class VoteTally:
    k: int
    counts: dict[Edge, int]
    dropped: list[dict] = field(default_factory=list)
    graphs: list[Dag] = field(default_factory=list, repr=False)

    def adjacency_votes(self, u: str, v: str) -> int:
        return self.counts.get((u, v), 0) + self.counts.get((v, u), 0)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "counts": [[u, v, n] for (u, v), n in sorted(self.counts.items())],
            "dropped": self.dropped,
        }


def tally_graphs(graphs: list[Dag]) -> VoteTally:
    counts = Counter(e for g in graphs for e in g.edges)
    return VoteTally(len(graphs), dict(counts), graphs=list(graphs))


def average_graph(nodes, tally: VoteTally, c: EdgeConstraints = EdgeConstraints()) -> Dag:
    """Majority-vote graph from per-fold edge counts.

    An adjacency is kept when more than k/2 folds contain it in either
    direction; direction follows the plurality and exact direction ties are
    dropped. Remaining cycles are broken by removing the lowest-vote edge on
    each cycle (never a whitelisted one).
    """
    k = tally.k
    chosen: dict[Edge, int] = {}
    pairs = sorted({tuple(sorted(e)) for e in tally.counts})
    for a, b in pairs:
        ab, ba = tally.counts.get((a, b), 0), tally.counts.get((b, a), 0)
        if ab + ba <= k / 2:
            continue
        if ab == ba:
            tally.dropped.append({"edge": [a, b], "reason": "direction tie", "votes": [ab, ba]})
            continue
        e = (a, b) if ab > ba else (b, a)
        if e in c.blacklist:
            tally.dropped.append({"edge": list(e), "reason": "blacklisted", "votes": [ab, ba]})
            continue
        chosen[e] = max(ab, ba)
    for e in c.whitelist:
        chosen.setdefault(e, tally.counts.get(e, 0))
    while True:
        cycle = _find_cycle(nodes, chosen)
        if not cycle:
            break
        ring = [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]
        removable = [e for e in ring if e not in c.whitelist]
        victim = min(removable, key=lambda e: (chosen[e], e))
        tally.dropped.append({"edge": list(victim), "reason": "cycle", "votes": [chosen[victim]]})
        del chosen[victim]
    return Dag(tuple(nodes), frozenset(chosen))


def cv_learn(
    c: EdgeConstraints, d: Dataset, k: int = 10, seed: int = 0, jobs: int = 1
) -> tuple[Dag, VoteTally]:
    """Learn one graph per fold complement, then majority-vote them.

    The per-fold graphs are kept on ``tally.graphs``.
    """
    plan = kfold_split(d.n, k, seed)

    def fold(i: int) -> Dag:
        train, _ = plan.split(i)
        g, trace = hill_climb(c, d.take(train), seed)
        log.info("fold %d/%d: %d edges, %d steps", i + 1, k, len(g.edges), len(trace.steps))
        return g

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            graphs = list(pool.map(fold, range(k)))
    else:
        graphs = [fold(i) for i in range(k)]
    tally = tally_graphs(graphs)
    return average_graph(d.names, tally, c), tally
