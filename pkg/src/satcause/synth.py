"""Ground-truth structural causal models and effect oracles.

Mechanisms are linear in their parents (categorical parents through
per-category weights ``"Parent=Category"``), optionally with centred
pairwise interaction terms and an output transform (softplus floor,
clipping, rounding). Only the built-in trace-like model uses the
non-linear extras; every other generator here is purely linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Union

import numpy as np

from .causal import QuerySpec
from .dag import Dag
from .dataset import CATEGORICAL, SAT_SCHEMA, ColumnSchema, Dataset, Predicate
from .query import ARGMAX, COMPARISON, MULTICONTRAST, TESTS, as_composite, render


@dataclass(frozen=True)
class Normal:
    sigma: float = 1.0

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(0.0, self.sigma, n)


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, n)


@dataclass(frozen=True)
class Categorical:
    categories: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.categories) != len(self.probs) or len(self.categories) < 2:
            raise ValueError("categories and probs must match and list at least 2 entries")
        if not math.isclose(sum(self.probs), 1.0, abs_tol=1e-9):
            raise ValueError("category probabilities must sum to 1")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(len(self.categories), size=n, p=np.asarray(self.probs))


Noise = Union[Normal, Uniform, Categorical]


@dataclass(frozen=True)
class Interaction:
    """``coef * (u - u_center) * (v - v_center)``."""

    u: str
    v: str
    coef: float
    u_center: float = 0.0
    v_center: float = 0.0


@dataclass(frozen=True)
class Mechanism:
    intercept: float = 0.0
    weights: Mapping[str, float] = field(default_factory=dict)
    interactions: tuple[Interaction, ...] = ()
    softplus: bool = False
    clip: tuple[float, float] | None = None
    integer: bool = False

    @property
    def linear(self) -> bool:
        return not (self.interactions or self.softplus or self.clip or self.integer)

    def parent_names(self) -> set[str]:
        names = {k.split("=", 1)[0] for k in self.weights}
        for t in self.interactions:
            names.update((t.u, t.v))
        return names


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class Scm:
    graph: Dag
    mechanisms: Mapping[str, Mechanism]
    noise: Mapping[str, Noise]

    def __post_init__(self):
        for v in self.graph.nodes:
            if v not in self.noise:
                raise ValueError(f"no noise spec for {v!r}")
            mech = self.mechanisms.get(v, Mechanism())
            pa = set(self.graph.parents(v))
            if isinstance(self.noise[v], Categorical):
                if pa or self.mechanisms.get(v, Mechanism()) != Mechanism():
                    raise ValueError(f"categorical node {v!r} must be a root without a mechanism")
                continue
            if mech.parent_names() != pa:
                raise ValueError(
                    f"mechanism of {v!r} uses {sorted(mech.parent_names())}, graph parents are {sorted(pa)}"
                )
            for key in mech.weights:
                if "=" in key:
                    p, cat = key.split("=", 1)
                    nz = self.noise[p]
                    if not isinstance(nz, Categorical) or cat not in nz.categories[1:]:
                        raise ValueError(f"bad categorical weight {key!r} on {v!r}")
                elif isinstance(self.noise[key], Categorical):
                    raise ValueError(f"categorical parent {key!r} needs per-category weights")
        # one mechanism per continuous node, none for categorical roots
        mechs = {v: self.mechanisms.get(v, Mechanism()) for v in self.graph.nodes if not self.is_categorical(v)}
        object.__setattr__(self, "mechanisms", mechs)

    def mechanism(self, v: str) -> Mechanism:
        return self.mechanisms.get(v, Mechanism())

    def is_categorical(self, v: str) -> bool:
        return isinstance(self.noise[v], Categorical)

    def schema(self) -> tuple[ColumnSchema, ...]:
        return tuple(
            ColumnSchema(v, CATEGORICAL, self.noise[v].categories)
            if self.is_categorical(v)
            else ColumnSchema(v)
            for v in self.graph.nodes
        )

    @property
    def linear(self) -> bool:
        return all(self.mechanism(v).linear for v in self.graph.nodes)

    def to_json(self) -> dict:
        noise = {}
        for v, nz in self.noise.items():
            if isinstance(nz, Normal):
                noise[v] = {"type": "normal", "sigma": nz.sigma}
            elif isinstance(nz, Uniform):
                noise[v] = {"type": "uniform", "lo": nz.lo, "hi": nz.hi}
            else:
                noise[v] = {"type": "categorical", "categories": list(nz.categories), "probs": list(nz.probs)}
        mechs = {}
        for v in self.mechanisms:
            m = self.mechanisms[v]
            mechs[v] = {
                "intercept": m.intercept,
                "weights": dict(sorted(m.weights.items())),
                "interactions": [
                    {"u": t.u, "v": t.v, "coef": t.coef, "u_center": t.u_center, "v_center": t.v_center}
                    for t in m.interactions
                ],
                "softplus": m.softplus,
                "clip": None if m.clip is None else [None if math.isinf(x) else x for x in m.clip],
                "integer": m.integer,
            }
        return {"graph": self.graph.to_json(), "mechanisms": mechs, "noise": noise}

    @classmethod
    def from_json(cls, doc: Mapping) -> Scm:
        noise: dict[str, Noise] = {}
        for v, spec in doc["noise"].items():
            t = spec["type"]
            if t == "normal":
                noise[v] = Normal(spec["sigma"])
            elif t == "uniform":
                noise[v] = Uniform(spec["lo"], spec["hi"])
            else:
                noise[v] = Categorical(tuple(spec["categories"]), tuple(spec["probs"]))
        mechs = {}
        for v, m in doc["mechanisms"].items():
            mechs[v] = Mechanism(
                m["intercept"],
                dict(m["weights"]),
                tuple(Interaction(**t) for t in m["interactions"]),
                m["softplus"],
                None if m["clip"] is None else (
                    -math.inf if m["clip"][0] is None else m["clip"][0],
                    math.inf if m["clip"][1] is None else m["clip"][1],
                ),
                m["integer"],
            )
        return cls(Dag.from_json(doc["graph"]), mechs, noise)


# -- sampling ----------------------------------------------------------------


def sample(scm: Scm, n: int, seed: int, do: Mapping[str, float | str] | None = None) -> Dataset:
    """Ancestral sampling in topological order.

    Noise for every node is drawn up front in declaration order, so samples
    taken with the same seed under different interventions share their
    exogenous noise (common random numbers).
    """
    if n < 1:
        raise ValueError("n must be positive")
    do = dict(do or {})
    rng = np.random.default_rng(seed)
    eps = {v: scm.noise[v].draw(rng, n) for v in scm.graph.nodes}
    vals: dict[str, np.ndarray] = {}
    for v in scm.graph.topological_order():
        nz = scm.noise[v]
        if v in do:
            x = do[v]
            if isinstance(nz, Categorical):
                vals[v] = np.full(n, nz.categories.index(x), dtype=np.int64)
            else:
                vals[v] = np.full(n, float(x))
            continue
        if isinstance(nz, Categorical):
            vals[v] = eps[v]
            continue
        m = scm.mechanism(v)
        x = m.intercept + eps[v]
        for key, w in m.weights.items():
            if "=" in key:
                p, cat = key.split("=", 1)
                x = x + w * (vals[p] == scm.noise[p].categories.index(cat))
            else:
                x = x + w * vals[key]
        for t in m.interactions:
            x = x + t.coef * (vals[t.u] - t.u_center) * (vals[t.v] - t.v_center)
        if m.softplus:
            x = _softplus(x)
        if m.clip is not None:
            x = np.clip(x, *m.clip)
        if m.integer:
            x = np.rint(x)
        vals[v] = x
    return Dataset(scm.schema(), {v: vals[v] for v in scm.graph.nodes}, provenance=f"scm seed={seed}")


# -- oracles -----------------------------------------------------------------


def _path_sum(scm: Scm, x: str, y: str, a, b) -> float:
    g = scm.graph
    total: dict[str, float] = {}
    for v in g.topological_order():
        if v == x or v not in g.descendants(x):
            continue
        w = scm.mechanism(v).weights
        s = 0.0
        for p in g.parents(v):
            if p == x:
                if scm.is_categorical(x):
                    s += w.get(f"{x}={a}", 0.0) - w.get(f"{x}={b}", 0.0)
                else:
                    s += w[x] * (float(a) - float(b))
            elif p in total:
                s += w[p] * total[p]
        total[v] = s
    return total.get(y, 0.0)


def _on_paths(g: Dag, x: str, y: str) -> set[str]:
    return (g.descendants(x) & (g.ancestors(y) | {y})) if g.has_directed_path(x, y) else set()


def oracle_ate(
    scm: Scm,
    x: str,
    y: str,
    a,
    b,
    condition: Predicate | None = None,
    *,
    n_mc: int = 400_000,
    seed: int = 20240,
) -> float:
    """E[y | do(x=a)] - E[y | do(x=b)], optionally restricted to ``condition``.

    Exact path-coefficient sum when every mechanism between ``x`` and ``y``
    is linear and there is no condition; otherwise a common-random-numbers
    Monte-Carlo contrast of two interventional samples.
    """
    g = scm.graph
    g.parents(x)
    g.parents(y)
    if not g.has_directed_path(x, y) or a == b:
        return 0.0
    if condition is None and all(scm.mechanism(v).linear for v in _on_paths(g, x, y)):
        return _path_sum(scm, x, y, a, b)
    da = sample(scm, n_mc, seed, {x: a})
    db = sample(scm, n_mc, seed, {x: b})
    diff = da[y] - db[y]
    if condition is not None:
        if condition.column in g.descendants(x) or condition.column == x:
            raise ValueError("condition must not depend on the treatment")
        diff = diff[condition.mask(da)]
    return float(diff.mean())


# -- built-in models ---------------------------------------------------------


def overcontrol_scm() -> Scm:
    """LBD confounds Propagation -> LastTouch; Activity is their common effect."""
    g = Dag.from_edges(
        [
            ("LBD", "Propagation"),
            ("LBD", "LastTouch"),
            ("Propagation", "LastTouch"),
            ("Propagation", "Activity"),
            ("LastTouch", "Activity"),
        ],
        nodes=("LBD", "Propagation", "LastTouch", "Activity"),
    )
    mechs = {
        "LBD": Mechanism(6.0),
        "Propagation": Mechanism(30.0, {"LBD": -2.0}),
        "LastTouch": Mechanism(100.0, {"LBD": 4.0, "Propagation": -2.5}),
        "Activity": Mechanism(0.0, {"Propagation": 0.5, "LastTouch": 0.8}),
    }
    noise = {"LBD": Normal(2.0), "Propagation": Normal(3.0), "LastTouch": Normal(4.0), "Activity": Normal(2.0)}
    return Scm(g, mechs, noise)


def overcontrol_scenario(seed: int = 0, n: int = 100_000) -> tuple[Dataset, Scm]:
    scm = overcontrol_scm()
    return sample(scm, n, seed), scm


def random_linear_scm(
    n_nodes: int,
    seed: int,
    edge_prob: float = 0.4,
    coef_range: tuple[float, float] = (0.5, 2.0),
    sigma_range: tuple[float, float] = (0.5, 1.5),
) -> Scm:
    """Random linear-Gaussian SCM over X0..X{n-1} (edges only go forward)."""
    rng = np.random.default_rng(seed)
    nodes = tuple(f"X{i}" for i in range(n_nodes))
    edges = []
    for j in range(n_nodes):
        for i in range(j):
            if rng.random() < edge_prob:
                edges.append((nodes[i], nodes[j]))
    g = Dag(nodes, frozenset(edges))
    mechs, noise = {}, {}
    for v in nodes:
        w = {}
        for p in sorted(g.parents(v)):
            w[p] = float(rng.choice([-1, 1]) * rng.uniform(*coef_range))
        mechs[v] = Mechanism(float(rng.normal(0, 1)), w)
        noise[v] = Normal(float(rng.uniform(*sigma_range)))
    return Scm(g, mechs, noise)


# Reference category first: VSIDS for branching, LBD-based for restarts.
TRACE_EDGES = (
    ("Branching", "LBD"),
    ("Branching", "Size"),
    ("Branching", "Propagation"),
    ("Branching", "Utility"),
    ("Restart", "LBD"),
    ("Restart", "Size"),
    ("Restart", "Propagation"),
    ("Restart", "Utility"),
    ("Time", "LastTouch"),
    ("Time", "Utility"),
    ("LBD", "Propagation"),
    ("LBD", "UIP"),
    ("LBD", "Utility"),
    ("Size", "Propagation"),
    ("Size", "UIP"),
    ("Size", "Utility"),
    ("Propagation", "Activity"),
    ("Propagation", "Utility"),
    ("UIP", "Activity"),
    ("UIP", "LastTouch"),
    ("UIP", "Utility"),
    ("Activity", "Utility"),
    ("LastTouch", "Utility"),
)

#: Split point of the LBD tiers used by the time-decay interaction.
LBD_TIER = 6.5
TIME_SPAN = 20_000.0


def trace_scm() -> Scm:
    """Built-in clause-trace model.

    Marginals are plausible inventions. Injected effects on Utility: LBD and
    Size negative, Propagation positive and the strongest standardized
    factor, Maple above VSIDS, Luby above Geometric above LBD-based, and a
    Time x LBD interaction so that utility grows over time for clauses in
    the low LBD tier and decays for the high tier.
    """
    nodes = tuple(c.name for c in SAT_SCHEMA)
    g = Dag(nodes, frozenset(TRACE_EDGES))
    mechs = {
        "Time": Mechanism(0.0, {}, integer=True),
        "LBD": Mechanism(
            4.5,
            {"Branching=Maple": 0.5, "Restart=Geometric": 0.3, "Restart=Luby": -0.5},
            clip=(1, 20),
            integer=True,
        ),
        "Size": Mechanism(
            32.0,
            {"Branching=Maple": 4.0, "Restart=Geometric": 1.0, "Restart=Luby": 2.0},
            clip=(20, 80),
            integer=True,
        ),
        "Propagation": Mechanism(
            50.0,
            {
                "LBD": -2.0,
                "Size": -0.4,
                "Branching=Maple": 4.0,
                "Restart=Geometric": 2.0,
                "Restart=Luby": 4.0,
            },
            clip=(0, math.inf),
            integer=True,
        ),
        "UIP": Mechanism(6.0, {"LBD": -0.5, "Size": 0.1}, clip=(0, math.inf), integer=True),
        "Activity": Mechanism(2.0, {"Propagation": 0.02, "UIP": 0.25}, clip=(0, math.inf)),
        "LastTouch": Mechanism(0.0, {"Time": 0.4, "UIP": -150.0}, clip=(0, math.inf), integer=True),
        "Utility": Mechanism(
            20.0,
            {
                "Propagation": 1.0,
                "UIP": 1.5,
                "Activity": 2.0,
                "LBD": -0.5,
                "Size": -0.25,
                "LastTouch": -0.002,
                "Time": 0.0004,
                "Branching=Maple": 8.0,
                "Restart=Geometric": 3.0,
                "Restart=Luby": 6.0,
            },
            interactions=(Interaction("Time", "LBD", -0.0008, TIME_SPAN / 2, LBD_TIER),),
            softplus=True,
        ),
    }
    noise = {
        "Branching": Categorical(("VSIDS", "Maple"), (0.5, 0.5)),
        "Restart": Categorical(("LBD-based", "Geometric", "Luby"), (1 / 3, 1 / 3, 1 / 3)),
        "Time": Uniform(0.0, TIME_SPAN),
        "LBD": Normal(2.5),
        "Size": Normal(6.0),
        "Propagation": Normal(14.0),
        "UIP": Normal(1.2),
        "Activity": Normal(2.0),
        "LastTouch": Normal(1500.0),
        "Utility": Normal(8.0),
    }
    return Scm(g, mechs, noise)


def generate_trace_like(n: int, seed: int) -> tuple[Dataset, Scm]:
    if n < 1000:
        raise ValueError("trace-like data needs n >= 1000")
    scm = trace_scm()
    return sample(scm, n, seed), scm


# -- ground-truth answers for queries ----------------------------------------


def oracle_part(scm: Scm, p, d: Dataset) -> float:
    """True value of one :class:`QuerySpec` under ``scm``.

    For a normalized query the treatment values are mapped back to raw
    units through the column moments of ``d`` and the effect is divided by
    the outcome's standard deviation. ACATE over a non-descendant equals
    the ATE.
    """
    a, b = p.a, p.b
    scale = 1.0
    if p.normalized:
        if not scm.is_categorical(p.treatment):
            mu, sd = float(d[p.treatment].mean()), float(d[p.treatment].std())
            a, b = mu + float(a) * sd, mu + float(b) * sd
        scale = float(d[p.outcome].std())
    if p.kind == "ACATE" and p.condition in scm.graph.descendants(p.treatment):
        raise ValueError(f"{p.condition!r} is affected by {p.treatment!r}")
    cond = p.condition if p.kind == "CATE" else None
    return oracle_ate(scm, p.treatment, p.outcome, a, b, cond) / scale


def oracle_query(scm: Scm, q, d: Dataset) -> dict:
    """Ground-truth values and verdict for a query, shaped like a run_query answer."""
    c = as_composite(q)
    out: dict = {"query": render(q), "kind": c.kind}
    if c.kind == ARGMAX:
        table = {}
        for t in sorted(v for v in scm.graph.nodes if v not in c.exclude):
            if scm.is_categorical(t):
                parts = [
                    QuerySpec("ATE", t, c.outcome, x, y, normalized=c.normalized)
                    for x, y in combinations(scm.noise[t].categories, 2)
                ]
            else:
                parts = [QuerySpec("ATE", t, c.outcome, 2.0, 1.0, normalized=c.normalized)]
            table[t] = max(abs(oracle_part(scm, p, d)) for p in parts)
        winner = min(table, key=lambda t: (-table[t], t))
        out["values"] = table
        out["verdict"] = {"winner": winner}
        return out
    vals = [oracle_part(scm, p, d) for p in c.parts]
    out["values"] = {render(p): v for p, v in zip(c.parts, vals)}
    if c.kind == TESTS:
        out["verdict"] = {"signs": [int(np.sign(v)) for v in vals]}
    elif c.kind == COMPARISON:
        m1, m2 = abs(vals[0]), abs(vals[1])
        out["verdict"] = {"larger": None if m1 == m2 else render(c.parts[0 if m1 > m2 else 1])}
    elif c.kind == MULTICONTRAST:
        wins = {lab: 0 for lab in c.labels}
        for p, v in zip(c.parts, vals):
            if v > 0:
                wins[p.a] += 1
            elif v < 0:
                wins[p.b] += 1
        ok = sorted(wins.values()) == list(range(len(c.labels)))
        out["verdict"] = {"order": sorted(c.labels, key=lambda lab: -wins[lab]) if ok else None}
    return out


def verdict_matches(answer: dict, truth: dict) -> bool:
    """Whether an estimated answer reaches the same verdict as the oracle."""
    kind = truth["kind"]
    if kind == "Tests":
        signs = [int(np.sign(e["value"])) for e in answer["estimates"]]
        return signs == truth["verdict"]["signs"]
    key = {"Comparison": "larger", "Argmax": "winner", "MultiContrast": "order"}[kind]
    return answer["verdict"][key] == truth["verdict"][key]
