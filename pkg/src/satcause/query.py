"""Query language, execution, and the built-in SAT question presets.

Grammar (whitespace-insensitive, one query per line)::

    query     := compare | argmax | contrast | tests
    tests     := test (";" test)* ["normalized"]
    test      := spec [relop number]
    spec      := "ATE(" T "," O "," a "," b ")" ["normalized"]
               | "CATE(" T "," O "," predicate "," a "," b ")" ["normalized"]
               | "ACATE(" T "," O "," W "," a "," b ")" ["normalized"]
    compare   := "COMPARE" "|" spec "|" relop "|" spec "|" ["normalized"]
    argmax    := "ARGMAX_ATE(" O [";" "exclude=" name ("," name)*] ")" ["normalized"]
    contrast  := "CONTRAST(" T "," O ";" label ("," label)+ ")" ["normalized"]

A trailing ``normalized`` after a whole query applies to every part.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Sequence, Union

from .causal import ACATE, ATE, CATE, EffectEstimate, QuerySpec, estimate_effect, refute_all
from .dag import Dag
from .dataset import SAT_SCHEMA, ColumnSchema, Dataset, _fmt, parse_predicate
from .errors import ArityError, DataError, QueryError, QuerySyntaxError, UnknownVariable

__all__ = [
    "ARGMAX",
    "COMPARISON",
    "MULTICONTRAST",
    "TESTS",
    "CompositeQuery",
    "Hypothesis",
    "Preset",
    "QuerySpec",
    "as_composite",
    "load_query_file",
    "parse_query",
    "preset_queries",
    "render",
    "run_query",
    "validate_query",
]

TESTS = "Tests"
COMPARISON = "Comparison"
ARGMAX = "Argmax"
MULTICONTRAST = "MultiContrast"

_RELOPS = ("<=", ">=", "<", ">")


@dataclass(frozen=True)
class Hypothesis:
    """``estimate <op> value``."""

    op: str
    value: float = 0.0

    def __post_init__(self):
        if self.op not in _RELOPS:
            raise QueryError(f"unknown relation {self.op!r}")

    def holds(self, x: float) -> bool:
        return _compare(x, self.op, self.value)

    def __str__(self) -> str:
        return f"{self.op} {_fmt(self.value)}"


def _compare(x: float, op: str, y: float) -> bool:
    return {"<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op]


@dataclass(frozen=True)
class CompositeQuery:
    """A question answered by one or more effect estimates.

    ``Tests``: independent estimates, each optionally checked against a
    hypothesis. ``Comparison``: ``|parts[0]| op |parts[1]|``. ``Argmax``:
    the treatment with the largest absolute effect on ``outcome`` (the
    outcome is always excluded). ``MultiContrast``: every pairwise effect
    among ``labels`` of a categorical treatment.
    """

    kind: str
    parts: tuple[QuerySpec, ...] = ()
    hypotheses: tuple[Hypothesis | None, ...] = ()
    op: str | None = None
    outcome: str | None = None
    exclude: tuple[str, ...] = ()
    labels: tuple[str, ...] = ()
    normalized: bool = False

    def __post_init__(self):
        if self.kind == TESTS:
            if not self.parts or len(self.hypotheses) != len(self.parts):
                raise QueryError("each test needs exactly one (possibly empty) hypothesis")
        elif self.kind == COMPARISON:
            if len(self.parts) != 2 or self.op not in _RELOPS:
                raise QueryError("a comparison needs two parts and a relation")
        elif self.kind == ARGMAX:
            if not self.outcome:
                raise QueryError("argmax needs an outcome")
            if self.outcome not in self.exclude:
                object.__setattr__(self, "exclude", (self.outcome, *self.exclude))
        elif self.kind == MULTICONTRAST:
            if len(self.labels) < 2 or len(set(self.labels)) != len(self.labels):
                raise QueryError("a contrast needs at least two distinct labels")
        else:
            raise QueryError(f"unknown composite kind {self.kind!r}")

    @classmethod
    def contrast(cls, treatment: str, outcome: str, labels: Sequence[str], normalized: bool = False):
        parts = tuple(
            QuerySpec(ATE, treatment, outcome, a, b, normalized=normalized) for a, b in combinations(labels, 2)
        )
        return cls(MULTICONTRAST, parts, labels=tuple(labels), normalized=normalized)

    def __str__(self) -> str:
        return render(self)


Query = Union[QuerySpec, CompositeQuery]


def as_composite(q: Query) -> CompositeQuery:
    if isinstance(q, CompositeQuery):
        return q
    return CompositeQuery(TESTS, (q,), (None,), normalized=q.normalized)


# -- rendering ---------------------------------------------------------------


def _spec_text(q: QuerySpec, with_flag: bool) -> str:
    return str(q) if with_flag else str(replace(q, normalized=False))


def render(q: Query) -> str:
    """Canonical text of a query; ``parse_query(render(q)) == q``."""
    if isinstance(q, QuerySpec):
        return str(q)
    shared = q.normalized and all(p.normalized for p in q.parts)
    own = not shared
    tail = " normalized" if q.normalized else ""
    if q.kind == TESTS:
        items = []
        for p, h in zip(q.parts, q.hypotheses):
            s = _spec_text(p, own)
            items.append(s if h is None else f"{s} {h}")
        return "; ".join(items) + tail
    if q.kind == COMPARISON:
        a, b = (_spec_text(p, own) for p in q.parts)
        return f"COMPARE |{a}| {q.op} |{b}|{tail}"
    if q.kind == ARGMAX:
        extra = [x for x in q.exclude if x != q.outcome]
        inner = q.outcome + (f"; exclude={', '.join(extra)}" if extra else "")
        return f"ARGMAX_ATE({inner}){tail}"
    t, o = q.parts[0].treatment, q.parts[0].outcome
    return f"CONTRAST({t}, {o}; {', '.join(q.labels)}){tail}"


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<op><=|>=|!=|==|≤|≥|≠|<|>|=)|(?P<punct>[(),;|])|(?P<word>[^\s(),;|<>=!≤≥≠]+))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks, i = [], 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            if text[i:].strip() == "":
                break
            raise QuerySyntaxError(f"unexpected character {text[i]!r}", i)
        kind = m.lastgroup
        if kind is not None:
            toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        i = m.end()
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, k: int = 0) -> _Tok | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def pos(self) -> int:
        t = self.peek()
        return t.pos if t else len(self.text)

    def next(self, what: str) -> _Tok:
        t = self.peek()
        if t is None:
            raise QuerySyntaxError(f"expected {what}, found end of input", len(self.text))
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next(repr(text))
        if t.text != text:
            raise QuerySyntaxError(f"expected {text!r}, found {t.text!r}", t.pos)
        return t

    def accept(self, text: str) -> bool:
        t = self.peek()
        if t is not None and t.text == text:
            self.i += 1
            return True
        return False

    def word(self, what: str) -> str:
        t = self.next(what)
        if t.kind != "word":
            raise QuerySyntaxError(f"expected {what}, found {t.text!r}", t.pos)
        return t.text

    def at_word(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "word" and t.text.upper() == text

    def flag(self) -> bool:
        if self.at_word("NORMALIZED"):
            self.i += 1
            return True
        return False

    # grammar
    def query(self) -> Query:
        if self.peek() is None:
            raise QuerySyntaxError("empty query", 0)
        if self.at_word("COMPARE"):
            q = self.compare()
        elif self.at_word("ARGMAX_ATE"):
            q = self.argmax()
        elif self.at_word("CONTRAST"):
            q = self.contrast()
        else:
            q = self.tests()
        t = self.peek()
        if t is not None:
            raise QuerySyntaxError(f"unexpected {t.text!r}", t.pos)
        return q

    def _arg(self) -> tuple[str, int]:
        """Raw text of one argument up to the next top-level ',' or ')'."""
        start = self.pos()
        depth = 0
        end = start
        while True:
            t = self.peek()
            if t is None:
                raise QuerySyntaxError("unterminated argument list", len(self.text))
            if t.text in (",", ")") and depth == 0:
                break
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
            end = t.pos + len(t.text)
            self.i += 1
        if end == start:
            raise QuerySyntaxError("empty argument", start)
        return self.text[start:end].strip(), start

    def spec(self) -> QuerySpec:
        head = self.next("ATE, CATE or ACATE")
        kind = head.text.upper()
        if kind not in (ATE, CATE, ACATE):
            raise QuerySyntaxError(f"expected ATE, CATE or ACATE, found {head.text!r}", head.pos)
        self.expect("(")
        args = [self._arg()]
        while self.accept(","):
            args.append(self._arg())
        self.expect(")")
        want = 4 if kind == ATE else 5
        if len(args) != want:
            raise ArityError(f"{kind} takes {want} arguments, got {len(args)}")
        for text, pos in args[:2]:
            _check_name(text, pos)
        t, o = args[0][0], args[1][0]
        a, b = _value(args[-2][0]), _value(args[-1][0])
        cond = None
        if kind == CATE:
            text, pos = args[2]
            try:
                cond = parse_predicate(text)
            except (DataError, ValueError) as exc:
                raise QuerySyntaxError(str(exc), pos) from None
        elif kind == ACATE:
            _check_name(*args[2])
            cond = args[2][0]
        normalized = self.flag()
        try:
            return QuerySpec(kind, t, o, a, b, cond, normalized)
        except QueryError as exc:
            raise QuerySyntaxError(str(exc), head.pos) from None

    def relop(self) -> str:
        t = self.next("a relation")
        op = {"≤": "<=", "≥": ">="}.get(t.text, t.text)
        if op not in _RELOPS:
            raise QuerySyntaxError(f"expected one of {', '.join(_RELOPS)}, found {t.text!r}", t.pos)
        return op

    def number(self) -> float:
        t = self.next("a number")
        try:
            return float(t.text)
        except ValueError:
            raise QuerySyntaxError(f"expected a number, found {t.text!r}", t.pos) from None

    def tests(self) -> Query:
        parts, hyps = [], []
        while True:
            parts.append(self.spec())
            t = self.peek()
            if t is not None and t.kind == "op":
                hyps.append(Hypothesis(self.relop(), self.number()))
            else:
                hyps.append(None)
            if not self.accept(";"):
                break
        shared = self.flag()
        if len(parts) == 1 and hyps[0] is None and not shared:
            return parts[0]
        if shared:
            parts = [replace(p, normalized=True) for p in parts]
        return CompositeQuery(TESTS, tuple(parts), tuple(hyps), normalized=shared)

    def compare(self) -> CompositeQuery:
        self.i += 1
        self.expect("|")
        p1 = self.spec()
        self.expect("|")
        op = self.relop()
        self.expect("|")
        p2 = self.spec()
        self.expect("|")
        shared = self.flag()
        parts = (p1, p2)
        if shared:
            parts = tuple(replace(p, normalized=True) for p in parts)
        if p1.outcome != p2.outcome:
            raise QuerySyntaxError("compared effects must share an outcome", self.pos())
        return CompositeQuery(COMPARISON, parts, op=op, normalized=shared)

    def argmax(self) -> CompositeQuery:
        self.i += 1
        self.expect("(")
        pos = self.pos()
        outcome = self.word("an outcome")
        _check_name(outcome, pos)
        exclude: list[str] = []
        if self.accept(";"):
            t = self.next("exclude=")
            if t.text.lower() != "exclude":
                raise QuerySyntaxError(f"expected 'exclude', found {t.text!r}", t.pos)
            self.expect("=")
            exclude.append(self.word("a variable name"))
            while self.accept(","):
                exclude.append(self.word("a variable name"))
        elif self.peek() is not None and self.peek().text == ",":
            raise ArityError("ARGMAX_ATE takes one outcome")
        self.expect(")")
        return CompositeQuery(ARGMAX, outcome=outcome, exclude=tuple(exclude), normalized=self.flag())

    def contrast(self) -> CompositeQuery:
        self.i += 1
        self.expect("(")
        pos = self.pos()
        t = self.word("a treatment")
        _check_name(t, pos)
        self.expect(",")
        pos = self.pos()
        o = self.word("an outcome")
        _check_name(o, pos)
        if not self.accept(";"):
            raise ArityError("CONTRAST takes a treatment, an outcome and a label list")
        labels = [self.word("a category label")]
        while self.accept(","):
            labels.append(self.word("a category label"))
        self.expect(")")
        if len(labels) < 2:
            raise ArityError("CONTRAST needs at least two labels")
        try:
            return CompositeQuery.contrast(t, o, labels, self.flag())
        except QueryError as exc:
            raise QuerySyntaxError(str(exc), pos) from None


_NAME = re.compile(r"^[A-Za-z_][\w\-]*$")


def _check_name(text: str, pos: int) -> None:
    if not _NAME.match(text):
        raise QuerySyntaxError(f"{text!r} is not a variable name", pos)


def _value(text: str) -> float | str:
    try:
        return float(text)
    except ValueError:
        return text


def parse_query(text: str) -> Query:
    """Parse one query expression.

    Variable names are only checked for shape here; whether they exist is
    decided when the query runs against a graph and dataset.
    """
    return _Parser(text).query()


def load_query_file(path) -> list[Query]:
    """One query per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_query(line))
    return out


# -- validation --------------------------------------------------------------


def _parts(q: Query) -> tuple[QuerySpec, ...]:
    return (q,) if isinstance(q, QuerySpec) else q.parts


def validate_query(q: Query, schema: Sequence[ColumnSchema] = SAT_SCHEMA) -> list[str]:
    """Type-check a query against a schema.

    Raises on hard errors (unknown variable, wrong value type); returns a
    list of warnings for legal but suspicious queries.
    """
    cols = {c.name: c for c in schema}
    warnings = []

    def col(name: str) -> ColumnSchema:
        if name not in cols:
            raise UnknownVariable(name)
        return cols[name]

    for p in _parts(q):
        tc, oc = col(p.treatment), col(p.outcome)
        if oc.is_categorical:
            raise QueryError(f"outcome {p.outcome!r} must be continuous")
        for v in (p.a, p.b):
            if tc.is_categorical and v not in tc.categories:
                raise QueryError(f"{v!r} is not a category of {p.treatment!r}")
            if not tc.is_categorical and isinstance(v, str):
                raise QueryError(f"treatment {p.treatment!r} is continuous; got label {v!r}")
        if p.kind == CATE:
            pc = col(p.condition.column)
            if pc.is_categorical and p.condition.op not in ("=", "!="):
                raise QueryError(f"ordering predicate on categorical column {pc.name!r}")
        if p.kind == ACATE:
            col(p.condition)
        if p.a == p.b:
            warnings.append(f"{p}: a == b, the effect is trivially 0")
        if p.normalized and tc.is_categorical:
            warnings.append(f"{p}: categorical treatments are not rescaled by normalization")
    if isinstance(q, CompositeQuery):
        if q.kind == ARGMAX:
            oc = col(q.outcome)
            if oc.is_categorical:
                raise QueryError(f"outcome {q.outcome!r} must be continuous")
            for x in q.exclude:
                col(x)
        if q.kind == MULTICONTRAST and not col(q.parts[0].treatment).is_categorical:
            raise QueryError("CONTRAST needs a categorical treatment")
    return warnings


# -- execution ---------------------------------------------------------------


def _sign_word(x: float) -> str:
    return "positive" if x > 0 else "negative" if x < 0 else "zero"


def _describe(p: QuerySpec, value: float, tc: ColumnSchema) -> str:
    if tc.is_categorical:
        if value == 0:
            text = f"{p.a} and {p.b} lead to the same {p.outcome}"
        else:
            more = "greater" if value > 0 else "smaller"
            text = f"{p.a} leads to {more} {p.outcome} than {p.b}"
    else:
        verb = "raises" if value > 0 else "lowers" if value < 0 else "does not change"
        text = f"moving {p.treatment} from {_fmt(p.b)} to {_fmt(p.a)} {verb} {p.outcome}"
    if p.kind == CATE:
        text += f" when {p.condition}"
    elif p.kind == ACATE:
        text += f" with {p.condition} held fixed"
    return text


@dataclass
class _Runner:
    g: Dag
    d: Dataset
    refute_runs: int
    seed: int
    jobs: int
    refute: bool = True
    cache: dict = field(default_factory=dict)

    def estimate(self, p: QuerySpec, refute: bool | None = None) -> EffectEstimate:
        refute = self.refute if refute is None else refute
        key = (render(p), refute)
        if key not in self.cache:
            e = estimate_effect(p, self.g, self.d)
            if refute:
                refute_all(e, self.g, self.d, self.refute_runs, self.seed)
            self.cache[key] = e
        return self.cache[key]

    def many(self, parts: Sequence[QuerySpec], refute: bool | None = None) -> list[EffectEstimate]:
        if self.jobs > 1 and len(parts) > 1:
            with ThreadPoolExecutor(self.jobs) as pool:
                return list(pool.map(lambda p: self.estimate(p, refute), parts))
        return [self.estimate(p, refute) for p in parts]

    def entry(self, e: EffectEstimate, hypothesis: Hypothesis | None = None) -> dict:
        out = e.to_json()
        out["normalized"] = e.query.normalized
        out["sign"] = _sign_word(e.value)
        if hypothesis is not None:
            out["hypothesis"] = f"{e.query} {hypothesis}"
            out["hypothesis_holds"] = hypothesis.holds(e.value)
        out["interpretation"] = _describe(e.query, e.value, self.d.column_schema(e.query.treatment))
        return out


def run_query(
    q: Query,
    g: Dag,
    d: Dataset,
    *,
    refute_runs: int = 100,
    seed: int = 0,
    refute: bool = True,
    jobs: int = 1,
) -> dict:
    """Answer a query and return a JSON-ready document.

    Every reported estimate carries its refutation results; ``status`` is
    ``"Failure"`` if any refutation rejects an estimate, else ``"Success"``.
    For Argmax only the winning treatment's estimates are refuted.
    """
    validate_query(q, d.schema)
    for v in {v for p in _parts(q) for v in (p.treatment, p.outcome)}:
        if v not in g.nodes:
            raise UnknownVariable(v)
    r = _Runner(g, d, refute_runs, seed, jobs, refute)
    c = as_composite(q)
    doc: dict = {"query": render(q), "kind": c.kind}
    if c.kind == TESTS:
        ests = r.many(c.parts)
        doc["estimates"] = [r.entry(e, h) for e, h in zip(ests, c.hypotheses)]
        hyps = [x["hypothesis_holds"] for x in doc["estimates"] if "hypothesis_holds" in x]
        doc["verdict"] = {"hypotheses_hold": all(hyps) if hyps else None}
        doc["interpretation"] = "; ".join(x["interpretation"] for x in doc["estimates"])
    elif c.kind == COMPARISON:
        ests = r.many(c.parts)
        doc["estimates"] = [r.entry(e) for e in ests]
        m1, m2 = abs(ests[0].value), abs(ests[1].value)
        larger = None if m1 == m2 else 0 if m1 > m2 else 1
        doc["verdict"] = {
            "magnitudes": [m1, m2],
            "larger": None if larger is None else render(c.parts[larger]),
            "hypothesis": f"|{render(c.parts[0])}| {c.op} |{render(c.parts[1])}|",
            "hypothesis_holds": _compare(m1, c.op, m2),
        }
        if larger is None:
            doc["interpretation"] = f"{c.parts[0].treatment} and {c.parts[1].treatment} have equal impact"
        else:
            win, lose = c.parts[larger].treatment, c.parts[1 - larger].treatment
            doc["interpretation"] = f"{win} has a greater impact on {c.parts[0].outcome} than {lose}"
    elif c.kind == ARGMAX:
        doc.update(_argmax(c, r))
    else:
        ests = r.many(c.parts)
        doc["estimates"] = [r.entry(e) for e in ests]
        doc.update(_order(c, ests))
    reported = [x for x in doc.get("estimates", [])]
    failed = [x["query"] for x in reported for t in x["refutations"] if not t["passed"]]
    doc["status"] = "Failure" if failed else "Success"
    doc["refuted"] = sorted(set(failed))
    return doc


def _argmax(c: CompositeQuery, r: _Runner) -> dict:
    cands = sorted(v for v in r.g.nodes if v not in c.exclude)
    rows = []
    for t in cands:
        tc = r.d.column_schema(t)
        if tc.is_categorical:
            parts = [
                QuerySpec(ATE, t, c.outcome, a, b, normalized=c.normalized) for a, b in combinations(tc.categories, 2)
            ]
        else:
            parts = [QuerySpec(ATE, t, c.outcome, 2.0, 1.0, normalized=c.normalized)]
        ests = r.many(parts, refute=False)
        best = max(ests, key=lambda e: abs(e.value))
        rows.append((t, best))
    rows.sort(key=lambda te: (-abs(te[1].value), te[0]))
    winner, best = rows[0]
    top = r.estimate(best.query)
    table = [
        {"treatment": t, "query": render(e.query), "ate": e.value, "abs_ate": abs(e.value), "stderr": e.stderr}
        for t, e in rows
    ]
    return {
        "ranking": table,
        "estimates": [r.entry(top)],
        "verdict": {"winner": winner},
        "interpretation": f"{winner} has the greatest impact on {c.outcome}",
    }


def _order(c: CompositeQuery, ests: Sequence[EffectEstimate]) -> dict:
    wins = {lab: 0 for lab in c.labels}
    ties = False
    for e in ests:
        if e.value > 0:
            wins[e.query.a] += 1
        elif e.value < 0:
            wins[e.query.b] += 1
        else:
            ties = True
    m = len(c.labels)
    transitive = not ties and sorted(wins.values()) == list(range(m))
    order = sorted(c.labels, key=lambda lab: -wins[lab]) if transitive else None
    o = c.parts[0].outcome
    if order is None:
        text = "pairwise effects do not form a consistent order"
    else:
        text = f"{order[0]} leads to the greatest {o} ({' > '.join(order)})"
    return {"verdict": {"order": order, "intransitive": not transitive}, "interpretation": text}


# -- presets -----------------------------------------------------------------


@dataclass(frozen=True)
class Preset:
    name: str
    question: str
    query: CompositeQuery

    @property
    def text(self) -> str:
        return render(self.query)


_PRESETS = (
    ("Q1", "Do low-LBD clauses have more utility than high-LBD ones?", "ATE(LBD, Utility, 2, 1) < 0"),
    (
        "Q2",
        "Do small clauses have more utility, and does that survive fixing LBD?",
        "ATE(Size, Utility, 2, 1) < 0; ACATE(Size, Utility, LBD, 2, 1) > 0",
    ),
    (
        "Q3",
        "Whose utility falls off over time, low-LBD or high-LBD clauses?",
        "CATE(Time, Utility, LBD <= 6, 10000, 0) >= 0; CATE(Time, Utility, LBD > 6, 10000, 0) < 0",
    ),
    (
        "Q4",
        "Which matters more for utility, clause size or LBD?",
        "COMPARE |ATE(Size, Utility, 2, 1)| > |ATE(LBD, Utility, 2, 1)| normalized",
    ),
    ("Q5", "Which single factor has the largest effect on utility?", "ARGMAX_ATE(Utility) normalized"),
    ("Q6", "Which branching heuristic gives higher utility, Maple or VSIDS?", "ATE(Branching, Utility, Maple, VSIDS)"),
    (
        "Q7",
        "Which restart policy gives the highest utility?",
        "CONTRAST(Restart, Utility; Luby, Geometric, LBD-based)",
    ),
)


def preset_queries() -> list[Preset]:
    """The seven built-in SAT questions, Q1 to Q7."""
    return [Preset(name, question, as_composite(parse_query(text))) for name, question, text in _PRESETS]


def preset(name: str) -> Preset:
    for p in preset_queries():
        if p.name.upper() == name.upper():
            return p
    raise QueryError(f"unknown preset {name!r}; choose from {', '.join(n for n, _, _ in _PRESETS)}")

