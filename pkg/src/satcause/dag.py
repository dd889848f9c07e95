"""Immutable DAGs, edge constraints, d-separation and DOT/JSON export."""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CycleError, CyclicWhitelist, SatCauseError, UnknownColumn, UnknownNode

Edge = tuple[str, str]


def _find_cycle(nodes: Iterable[str], edges: Iterable[Edge]) -> list[str] | None:
    """Return one directed cycle as a node list, or None if acyclic."""
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for u, v in edges:
        succ.setdefault(u, []).append(v)
        succ.setdefault(v, [])
    for v in succ:
        succ[v].sort()
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(succ, WHITE)
    parent: dict[str, str] = {}
    for root in sorted(succ):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = GREY
        while stack:
            u, it = stack[-1]
            for w in it:
                if color[w] == GREY:
                    cycle = [w]
                    x = u
                    while x != w:
                        cycle.append(x)
                        x = parent[x]
                    return cycle[::-1]
                if color[w] == WHITE:
                    color[w] = GREY
                    parent[w] = u
                    stack.append((w, iter(succ[w])))
                    break
            else:
                color[u] = BLACK
                stack.pop()
    return None


@dataclass(frozen=True)
class Dag:
    nodes: tuple[str, ...]
    edges: frozenset[Edge] = frozenset()
    _pa: Mapping[str, frozenset[str]] = field(init=False, repr=False, compare=False)
    _ch: Mapping[str, frozenset[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        edges = frozenset((str(u), str(v)) for u, v in self.edges)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node names")
        known = set(nodes)
        pa = {v: set() for v in nodes}
        ch = {v: set() for v in nodes}
        for u, v in edges:
            for x in (u, v):
                if x not in known:
                    raise UnknownNode(x)
            if u == v:
                raise CycleError(f"self-loop on {u!r}")
            pa[v].add(u)
            ch[u].add(v)
        cycle = _find_cycle(nodes, edges)
        if cycle:
            raise CycleError("cycle " + " -> ".join(cycle + cycle[:1]))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_pa", {v: frozenset(s) for v, s in pa.items()})
        object.__setattr__(self, "_ch", {v: frozenset(s) for v, s in ch.items()})

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], nodes: Sequence[str] = ()) -> Dag:
        edges = list(edges)
        order = list(nodes)
        seen = set(order)
        for e in edges:
            for x in e:
                if x not in seen:
                    seen.add(x)
                    order.append(x)
        return cls(tuple(order), frozenset(edges))

    def _check(self, x: str) -> None:
        if x not in self._pa:
            raise UnknownNode(x)

    def parents(self, x: str) -> frozenset[str]:
        self._check(x)
        return self._pa[x]

    def children(self, x: str) -> frozenset[str]:
        self._check(x)
        return self._ch[x]

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self.edges

    def adjacent(self, u: str, v: str) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(e) for e in self.edges)

    def v_structures(self) -> frozenset[tuple[str, str, str]]:
        """Unshielded colliders ``(a, c, b)`` with a < b, a -> c <- b."""
        out = set()
        for c in self.nodes:
            pa = sorted(self._pa[c])
            for i, a in enumerate(pa):
                for b in pa[i + 1 :]:
                    if not self.adjacent(a, b):
                        out.add((a, c, b))
        return frozenset(out)

    def descendants(self, x: str) -> frozenset[str]:
        self._check(x)
        seen: set[str] = set()
        todo = list(self._ch[x])
        while todo:
            v = todo.pop()
            if v not in seen:
                seen.add(v)
                todo.extend(self._ch[v])
        return frozenset(seen)

    def ancestors(self, x: str) -> frozenset[str]:
        self._check(x)
        seen: set[str] = set()
        todo = list(self._pa[x])
        while todo:
            v = todo.pop()
            if v not in seen:
                seen.add(v)
                todo.extend(self._pa[v])
        return frozenset(seen)

    def has_directed_path(self, u: str, v: str) -> bool:
        return v in self.descendants(u)

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; ties resolved by declaration order."""
        rank = {v: i for i, v in enumerate(self.nodes)}
        indeg = {v: len(self._pa[v]) for v in self.nodes}
        ready = sorted((v for v in self.nodes if indeg[v] == 0), key=rank.get)
        out = []
        while ready:
            v = ready.pop(0)
            out.append(v)
            for w in sorted(self._ch[v], key=rank.get):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
            ready.sort(key=rank.get)
        return out

    def without_edges(self, edges: Iterable[Edge]) -> Dag:
        return Dag(self.nodes, self.edges - frozenset(edges))

    def with_edges(self, edges: Iterable[Edge]) -> Dag:
        return Dag(self.nodes, self.edges | frozenset(edges))

    def backdoor_graph(self, treatment: str) -> Dag:
        """The graph with every edge out of ``treatment`` removed."""
        return self.without_edges((treatment, c) for c in self.children(treatment))

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_json(cls, doc: Mapping) -> Dag:
        return cls(tuple(doc["nodes"]), frozenset(tuple(e) for e in doc["edges"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def to_dot(g: Dag, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    lines += [f'  "{v}";' if not v.isidentifier() else f"  {v};" for v in g.nodes]
    for u, v in sorted(g.edges):
        lines.append(f"  {_dot_id(u)} -> {_dot_id(v)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(v: str) -> str:
    return v if v.isidentifier() else f'"{v}"'


# -- d-separation ------------------------------------------------------------


def d_separated(g: Dag, x: str, y: str, s: Iterable[str] = ()) -> bool:
    """True iff every path between ``x`` and ``y`` is blocked by ``s``.

    Reachability search over (node, direction) states: a trail may pass a
    non-collider only if it is unobserved, and a collider only if it or one
    of its descendants is observed.
    """
    s = frozenset(s)
    for v in (x, y, *s):
        g._check(v)
    if x == y:
        raise ValueError("d-separation needs two distinct nodes")
    if x in s or y in s:
        raise ValueError("query nodes must not be in the conditioning set")
    return y not in _reachable(g, x, s)


def _reachable(g: Dag, x: str, s: frozenset[str]) -> set[str]:
    # nodes with an observed descendant (including themselves)
    anc_s = set(s)
    todo = list(s)
    while todo:
        v = todo.pop()
        for p in g._pa[v]:
            if p not in anc_s:
                anc_s.add(p)
                todo.append(p)

    UP, DOWN = 0, 1  # UP: arrived from a child; DOWN: arrived from a parent
    seen = set()
    reach = set()
    queue = deque([(x, UP)])
    while queue:
        v, d = queue.popleft()
        if (v, d) in seen:
            continue
        seen.add((v, d))
        if v not in s:
            reach.add(v)
        if d == UP and v not in s:
            queue.extend((p, UP) for p in g._pa[v])
            queue.extend((c, DOWN) for c in g._ch[v])
        elif d == DOWN:
            if v not in s:
                queue.extend((c, DOWN) for c in g._ch[v])
            if v in anc_s:
                queue.extend((p, UP) for p in g._pa[v])
    reach.discard(x)
    return reach


def d_connected_nodes(g: Dag, x: str, s: Iterable[str] = ()) -> frozenset[str]:
    """All nodes d-connected to ``x`` given ``s``."""
    return frozenset(_reachable(g, x, frozenset(s)))


# -- constraints and edits ---------------------------------------------------


@dataclass(frozen=True)
class EdgeConstraints:
    whitelist: frozenset[Edge] = frozenset()
    blacklist: frozenset[Edge] = frozenset()

    def __post_init__(self):
        wl = frozenset(tuple(e) for e in self.whitelist)
        bl = frozenset(tuple(e) for e in self.blacklist)
        both = wl & bl
        if both:
            raise ValueError(f"edges both required and forbidden: {sorted(both)}")
        if _find_cycle((), wl):
            raise CyclicWhitelist()
        object.__setattr__(self, "whitelist", wl)
        object.__setattr__(self, "blacklist", bl)

    def allows(self, g: Dag) -> bool:
        return self.whitelist <= g.edges and not (self.blacklist & g.edges)

    def to_json(self) -> dict:
        return {
            "whitelist": [list(e) for e in sorted(self.whitelist)],
            "blacklist": [list(e) for e in sorted(self.blacklist)],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> EdgeConstraints:
        return cls(
            frozenset(tuple(e) for e in doc.get("whitelist", [])),
            frozenset(tuple(e) for e in doc.get("blacklist", [])),
        )


def default_sat_constraints(schema) -> EdgeConstraints:
    """Blacklist encoding solver domain knowledge.

    Heuristic choices and Time are inputs, LBD and Size are fixed before
    anything but the heuristics can influence them, and Utility is measured
    last.
    """
    names = [c if isinstance(c, str) else c.name for c in schema]
    for required in ("Branching", "Restart", "Time", "LBD", "Size", "Utility"):
        if required not in names:
            raise UnknownColumn(required)
    heuristics = {"Branching", "Restart"}
    bl = set()
    for u in names:
        for v in names:
            if u == v:
                continue
            if v in heuristics or v == "Time" or u == "Utility":
                bl.add((u, v))
            elif v in ("LBD", "Size") and u not in heuristics:
                bl.add((u, v))
    return EdgeConstraints(frozenset(), frozenset(bl))


class Reason(enum.Enum):
    CYCLE = "Cycle"
    WHITELIST = "WhitelistViolation"
    BLACKLIST = "BlacklistViolation"
    NO_SUCH_EDGE = "NoSuchEdge"
    EDGE_EXISTS = "EdgeExists"


class EditRejected(SatCauseError):
    def __init__(self, reason: Reason, edit: Edit):
        super().__init__(f"{edit} rejected: {reason.value}")
        self.reason = reason
        self.edit = edit


@dataclass(frozen=True, order=True)
class Edit:
    kind: str  # "add" | "remove" | "reverse"
    u: str
    v: str

    def __post_init__(self):
        if self.kind not in ("add", "remove", "reverse"):
            raise ValueError(f"unknown edit kind {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind}({self.u},{self.v})"


def edit_problem(g: Dag, e: Edit, c: EdgeConstraints) -> Reason | None:
    """Why ``e`` cannot be applied to ``g`` under ``c``, or None if it can."""
    u, v = e.u, e.v
    if e.kind == "add":
        if u == v or g.adjacent(u, v):
            return Reason.EDGE_EXISTS if g.has_edge(u, v) else Reason.CYCLE
        if (u, v) in c.blacklist:
            return Reason.BLACKLIST
        if u in g.descendants(v):
            return Reason.CYCLE
        return None
    if not g.has_edge(u, v):
        return Reason.NO_SUCH_EDGE
    if (u, v) in c.whitelist:
        return Reason.WHITELIST
    if e.kind == "remove":
        return None
    if (v, u) in c.blacklist:
        return Reason.BLACKLIST
    # reversing creates a cycle iff another directed path u ~> v exists
    if _reaches_avoiding(g, u, v, (u, v)):
        return Reason.CYCLE
    return None


def _reaches_avoiding(g: Dag, src: str, dst: str, skip: Edge) -> bool:
    seen = set()
    todo = [w for w in g._ch[src] if (src, w) != skip]
    while todo:
        w = todo.pop()
        if w == dst:
            return True
        if w not in seen:
            seen.add(w)
            todo.extend(g._ch[w])
    return False


def apply_edit(g: Dag, e: Edit, c: EdgeConstraints = EdgeConstraints()) -> Dag:
    """Apply one add/remove/reverse edit, raising :class:`EditRejected` if invalid."""
    g._check(e.u)
    g._check(e.v)
    reason = edit_problem(g, e, c)
    if reason is not None:
        raise EditRejected(reason, e)
    if e.kind == "add":
        return Dag(g.nodes, g.edges | {(e.u, e.v)})
    if e.kind == "remove":
        return Dag(g.nodes, g.edges - {(e.u, e.v)})
    return Dag(g.nodes, (g.edges - {(e.u, e.v)}) | {(e.v, e.u)})
