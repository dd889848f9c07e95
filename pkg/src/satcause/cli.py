"""Command-line front end.

Exit codes: 0 success, 2 data error, 3 learning failure, 4 refutation
failure (or no reliable estimate), 5 query error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import synth
from .causal import REFUTATIONS, estimate_effect, refute_all
from .dag import Dag, EdgeConstraints, default_sat_constraints, to_dot
from .dataset import SAT_SCHEMA, Dataset, load_csv, schema_from_json, schema_to_json, write_csv
from .errors import CycleError, DataError, EstimationError, LearningError, QueryError, SatCauseError
from .fitness import evaluate_fit, variable_correlations
from .learn import cv_learn
from .query import as_composite, load_query_file, parse_query, preset, preset_queries, render, run_query

log = logging.getLogger("satcause")

FORMAT_VERSION = 1
EXIT_OK, EXIT_DATA, EXIT_LEARN, EXIT_REFUTED, EXIT_QUERY = 0, 2, 3, 4, 5

# Subset-estimate spread above this fraction of |estimate| is reported.
WIDE_VARIANCE = 0.1


def _default_out() -> str:
    return os.environ.get("SATCAUSE_OUT", "satcause-out")


@dataclass
class RunConfig:
    """Effective settings of one invocation.

    Precedence, lowest first: these defaults (``out`` falls back to the
    ``SATCAUSE_OUT`` environment variable), a ``key = value`` config file,
    command-line flags.
    """

    data: str | None = None
    schema: str | None = None
    constraints: str = "auto"
    graph: str | None = None
    k: int = 10
    seed: int = 0
    refute_runs: int = 100
    target: str = "Utility"
    out: str = field(default_factory=_default_out)
    jobs: int = 1
    simulate: str | None = None

    def to_json(self) -> dict:
        return asdict(self)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str):
    t = _TYPES[key]
    if t == "int":
        try:
            return int(value)
        except ValueError:
            raise DataError(f"config key {key!r} needs an integer, got {value!r}") from None
    return value


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{i}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise DataError(f"{path}:{i}: unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in _TYPES:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values)


# -- loading -----------------------------------------------------------------


def _schema(cfg: RunConfig):
    if cfg.schema is None:
        return SAT_SCHEMA
    return schema_from_json(_read_json(cfg.schema))


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def load_data(cfg: RunConfig) -> Dataset:
    if cfg.data is None:
        raise DataError("no data file given (use --data)")
    return load_csv(cfg.data, _schema(cfg))


def load_graph(cfg: RunConfig, d: Dataset) -> Dag:
    if cfg.graph is None:
        raise DataError("no graph file given (use --graph)")
    doc = _read_json(cfg.graph)
    try:
        g = Dag.from_json(doc)
    except (KeyError, TypeError) as exc:
        raise DataError(f"{cfg.graph}: not a graph document ({exc})") from None
    except CycleError as exc:
        raise DataError(f"{cfg.graph}: {exc}") from None
    missing = [v for v in g.nodes if v not in d]
    if missing:
        raise DataError(f"{cfg.graph}: nodes {missing} are not data columns")
    return g


def load_constraints(cfg: RunConfig, schema) -> EdgeConstraints:
    """Merge every comma-separated source: ``default-sat``, ``none``, JSON files."""
    spec = cfg.constraints
    if spec == "auto":
        sat = {c.name for c in SAT_SCHEMA}
        spec = "default-sat" if sat <= {c.name for c in schema} else "none"
    white, black = set(), set()
    for part in (s.strip() for s in spec.split(",")):
        if part == "none" or not part:
            continue
        if part == "default-sat":
            c = default_sat_constraints(schema)
        else:
            doc = _read_json(part)
            try:
                c = EdgeConstraints.from_json(doc)
            except ValueError as exc:
                raise DataError(f"{part}: {exc}") from None
        white |= c.whitelist
        black |= c.blacklist
    try:
        return EdgeConstraints(frozenset(white), frozenset(black))
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _simulate_spec(text: str) -> dict:
    """``n=200000,model=trace`` (a bare number is taken as n)."""
    spec = {"n": None, "model": "trace"}
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        key, _, value = item.partition("=") if "=" in item else ("n", "=", item)
        key = key.strip()
        if key not in spec:
            raise DataError(f"unknown simulate option {key!r}")
        spec[key] = value.strip()
    try:
        spec["n"] = int(float(spec["n"]))
    except (TypeError, ValueError):
        raise DataError(f"simulate needs n=<rows>, got {text!r}") from None
    if spec["model"] not in ("trace", "overcontrol"):
        raise DataError(f"unknown simulation model {spec['model']!r}")
    if spec["n"] < (1000 if spec["model"] == "trace" else 1):
        raise DataError(f"too few rows for the {spec['model']} model: {spec['n']}")
    return spec


# -- output ------------------------------------------------------------------


def _envelope(cfg: RunConfig, body: dict) -> dict:
    return {"format_version": FORMAT_VERSION, "config": cfg.to_json(), **body}


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n")
    log.info("wrote %s", path)


def _write_graph(cfg: RunConfig, out: Path, g: Dag, tally) -> None:
    _write_json(out / "graph.json", _envelope(cfg, g.to_json()))
    header = f"// format_version {FORMAT_VERSION}\n// config {json.dumps(cfg.to_json(), sort_keys=True)}\n"
    (out / "graph.dot").write_text(header + to_dot(g))
    body = tally.to_json()
    body["fold_graphs"] = [x.to_json()["edges"] for x in tally.graphs]
    _write_json(out / "tally.json", _envelope(cfg, body))


def _learn(cfg: RunConfig, d: Dataset):
    c = load_constraints(cfg, d.schema)
    try:
        return cv_learn(c, d, cfg.k, cfg.seed, cfg.jobs)
    except EstimationError as exc:
        raise LearningError(f"scoring failed: {exc}") from None


# -- commands ----------------------------------------------------------------


def cmd_learn(cfg: RunConfig, args) -> int:
    d = load_data(cfg)
    g, tally = _learn(cfg, d)
    _write_graph(cfg, Path(cfg.out), g, tally)
    print(f"learned {len(g.edges)} edges from {d.n} rows; dropped {len(tally.dropped)}")
    return EXIT_OK


def _queries(args) -> list:
    if args.preset:
        return [preset(name).query for name in args.preset]
    if args.expr:
        return [parse_query(e) for e in args.expr]
    if args.file:
        return load_query_file(args.file)
    raise QueryError("give --preset, --expr or --file")


def cmd_query(cfg: RunConfig, args) -> int:
    d = load_data(cfg)
    g = load_graph(cfg, d)
    qs = _queries(args)
    answers = [run_query(q, g, d, refute_runs=cfg.refute_runs, seed=cfg.seed, jobs=cfg.jobs) for q in qs]
    status = "Success" if all(a["status"] == "Success" for a in answers) else "Failure"
    _write_json(Path(cfg.out) / "answers.json", _envelope(cfg, {"status": status, "answers": answers}))
    for a in answers:
        print(f"{a['query']}: {a['interpretation']} [{a['status']}]")
    return EXIT_OK if status == "Success" else EXIT_REFUTED


def cmd_refute(cfg: RunConfig, args) -> int:
    d = load_data(cfg)
    g = load_graph(cfg, d)
    results = []
    for q in _queries(args):
        for p in as_composite(q).parts:
            e = refute_all(estimate_effect(p, g, d), g, d, cfg.refute_runs, cfg.seed)
            results.append(e.to_json())
            for r in e.refutations:
                print(f"{render(p)}  {r.kind:18s} p={r.p_value:.3f} {'pass' if r.passed else 'FAIL'}")
    ok = all(r["passed"] for e in results for r in e["refutations"])
    body = {"status": "Success" if ok else "Failure", "refutation_kinds": list(REFUTATIONS), "estimates": results}
    _write_json(Path(cfg.out) / "refutation.json", _envelope(cfg, body))
    return EXIT_OK if ok else EXIT_REFUTED


def _run_simulation(cfg: RunConfig, spec: dict, out: Path) -> tuple[Dataset, synth.Scm]:
    if spec["model"] == "trace":
        d, scm = synth.generate_trace_like(spec["n"], cfg.seed)
    else:
        d, scm = synth.overcontrol_scenario(cfg.seed, spec["n"])
    out.mkdir(parents=True, exist_ok=True)
    write_csv(d, out / "data.csv")
    _write_json(out / "scm.json", _envelope(cfg, {"model": spec["model"], "n": spec["n"], **scm.to_json()}))
    _write_json(out / "schema.json", schema_to_json(d.schema))
    return d, scm


def cmd_simulate(cfg: RunConfig, args) -> int:
    text = cfg.simulate or ""
    if args.n is not None:
        text += f",n={args.n}"
    if args.model is not None:
        text += f",model={args.model}"
    spec = _simulate_spec(text)
    d, _ = _run_simulation(cfg, spec, Path(cfg.out))
    print(f"wrote {d.n} rows to {Path(cfg.out) / 'data.csv'}")
    return EXIT_OK


def cmd_fitness(cfg: RunConfig, args) -> int:
    d = load_data(cfg)
    g = load_graph(cfg, d)
    rep = evaluate_fit(g, d, cfg.k, cfg.target, cfg.seed)
    body = {**rep.to_json(), "correlations": variable_correlations(d, cfg.target)}
    _write_json(Path(cfg.out) / "fitness.json", _envelope(cfg, body))
    print(f"mse {rep.mse:.6g} (baseline {rep.baseline_mse:.6g}), pearson {rep.pearson:.4f}")
    return EXIT_OK


def cmd_export_dot(cfg: RunConfig, args) -> int:
    if cfg.graph is None:
        raise DataError("no graph file given (use --graph)")
    try:
        g = Dag.from_json(_read_json(cfg.graph))
    except (KeyError, TypeError, CycleError) as exc:
        raise DataError(f"{cfg.graph}: not a graph document ({exc})") from None
    text = to_dot(g)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return EXIT_OK


def _variance_warnings(doc: dict) -> list[str]:
    out = []
    for e in doc.get("estimates", []):
        for r in e["refutations"]:
            if r["kind"] == "DataSubset" and r["run_std"] > WIDE_VARIANCE * abs(e["value"]):
                out.append(
                    f"{e['query']}: wide refutation variance "
                    f"(subset sd {r['run_std']:.4g} vs |estimate| {abs(e['value']):.4g})"
                )
    return out


def pipeline_report(cfg: RunConfig) -> tuple[dict, bool]:
    """Run simulate (optional), learn, every preset and fitness; return the report."""
    out = Path(cfg.out)
    scm = None
    if cfg.simulate:
        spec = _simulate_spec(cfg.simulate)
        if spec["model"] != "trace":
            raise DataError("pipeline simulation needs the trace model")
        log.info("simulating %d rows", spec["n"])
        d, scm = _run_simulation(cfg, spec, out)
        source = {"simulated": spec}
    else:
        d = load_data(cfg)
        source = {"path": cfg.data}
    source.update(n=d.n, columns=list(d.names))
    log.info("learning structure (k=%d)", cfg.k)
    g, tally = _learn(cfg, d)
    _write_graph(cfg, out, g, tally)
    presets, warnings = [], []
    for p in preset_queries():
        log.info("answering %s", p.name)
        try:
            ans = run_query(p.query, g, d, refute_runs=cfg.refute_runs, seed=cfg.seed, jobs=cfg.jobs)
        except EstimationError as exc:
            ans = {"query": p.text, "status": "Failure", "error": str(exc)}
        entry = {"name": p.name, "question": p.question, "answer": ans}
        if scm is not None and "error" not in ans:
            truth = synth.oracle_query(scm, p.query, d)
            entry["ground_truth"] = truth
            entry["matches_ground_truth"] = synth.verdict_matches(ans, truth)
        warnings += _variance_warnings(ans)
        presets.append(entry)
    fit = evaluate_fit(g, d, cfg.k, cfg.target, cfg.seed)
    ok = all(e["answer"]["status"] == "Success" for e in presets)
    body = {
        "status": "Success" if ok else "Failure",
        "data": source,
        "graph": g.to_json(),
        "dropped_edges": tally.dropped,
        "presets": presets,
        "fitness": fit.to_json(),
        "correlations": variable_correlations(d, cfg.target),
        "warnings": warnings,
    }
    if scm is not None:
        body["all_match_ground_truth"] = all(e.get("matches_ground_truth", False) for e in presets)
    return _envelope(cfg, body), ok


def cmd_pipeline(cfg: RunConfig, args) -> int:
    report, ok = pipeline_report(cfg)
    _write_json(Path(cfg.out) / "report.json", report)
    for e in report["presets"]:
        a = e["answer"]
        print(f"{e['name']}: {a.get('interpretation', a.get('error'))} [{a['status']}]")
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_REFUTED


# -- argument parsing --------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS, help="log progress (-vv: debug)")
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--data", help="input CSV")
    g.add_argument("--schema", help="JSON column schema (default: the ten SAT columns)")
    g.add_argument("--constraints", help="default-sat, none, or JSON files, comma separated (default: auto)")
    g.add_argument("--graph", help="graph JSON from `learn`")
    g.add_argument("--k", type=int, help="folds (default 10)")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--refute-runs", dest="refute_runs", type=int, help="runs per refutation (default 100)")
    g.add_argument("--target", help="outcome column for fitness (default Utility)")
    g.add_argument("--out", help="output directory (default $SATCAUSE_OUT or ./satcause-out)")
    g.add_argument("--jobs", type=int, help="worker threads (default 1)")
    g.add_argument("--simulate", help="simulate data first, e.g. n=200000")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satcause", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS, help="log progress (-vv: debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a causal graph with k-fold hill climbing")
    _common(p)
    p.set_defaults(func=cmd_learn)

    for name, func, helptext in (
        ("query", cmd_query, "answer causal queries"),
        ("refute", cmd_refute, "run refutation tests on query estimates"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--preset", action="append", help="built-in question Q1..Q7 (repeatable)")
        src.add_argument("--expr", action="append", help="query expression (repeatable)")
        src.add_argument("--file", help="file with one query per line")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="sample synthetic data from a built-in model")
    _common(p)
    p.add_argument("--n", type=int, help="rows")
    p.add_argument("--model", choices=("trace", "overcontrol"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fitness", help="k-fold predictive fit of a graph")
    _common(p)
    p.set_defaults(func=cmd_fitness)

    p = sub.add_parser("pipeline", help="simulate/learn/query/fitness in one go")
    _common(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("export-dot", help="convert a graph JSON to DOT")
    _common(p)
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(getattr(args, "verbose", 0), 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        cfg = build_config(args)
        return args.func(cfg, args)
    except FileNotFoundError as exc:
        print(f"error: cannot read {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except LearningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LEARN
    except QueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY
    except EstimationError as exc:
        print(f"error: no reliable estimate: {exc}", file=sys.stderr)
        return EXIT_REFUTED
    except SatCauseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
