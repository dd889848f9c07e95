"""Simulate trace data, run the full pipeline and summarize the report.

Equivalent to ``satcause pipeline --simulate n=<n> --seed <seed>`` followed
by a table of each built-in question, its answer and whether the answer
agrees with the simulator's ground truth.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from satcause.cli import main as cli_main


@dataclass
class Config:
    n: int = 200_000
    seed: int = 1
    refute_runs: int = 100
    out: str = "pipeline-out"


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(Config()).items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=type(default), default=default)
    cfg = Config(**vars(p.parse_args()))
    rc = cli_main(
        [
            "pipeline",
            "--simulate",
            f"n={cfg.n}",
            "--seed",
            str(cfg.seed),
            "--refute-runs",
            str(cfg.refute_runs),
            "--out",
            cfg.out,
        ]
    )
    report = json.loads((Path(cfg.out) / "report.json").read_text())
    print()
    print(f"{'preset':6s} {'truth':6s} answer")
    for e in report["presets"]:
        mark = "ok" if e.get("matches_ground_truth") else "MISS"
        print(f"{e['name']:6s} {mark:6s} {e['answer'].get('interpretation', e['answer'].get('error'))}")
    fit = report["fitness"]
    print(f"\nfitness: mse {fit['mse']:.2f} (all-column baseline {fit['baseline_mse']:.2f}), pearson {fit['pearson']:.3f}")
    print(f"status {report['status']}, all verdicts match ground truth: {report.get('all_match_ground_truth')}")
    return rc


if __name__ == "__main__":
    sys.exit(main())
