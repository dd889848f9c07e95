"""Structure recovery of the built-in trace model across sample sizes and seeds.

For each (n, seed) the data are simulated, a graph is learned with k-fold
majority-vote hill climbing under the default SAT constraints, and the
learned skeleton and orientation are compared with the true graph.
"""

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from satcause.dag import default_sat_constraints
from satcause.learn import cv_learn
from satcause.synth import generate_trace_like


@dataclass
class Config:
    sizes: list[int] = field(default_factory=lambda: [2_000, 10_000, 50_000])
    seeds: int = 5
    k: int = 10


def score(n: int, seed: int, k: int) -> dict:
    d, scm = generate_trace_like(n, seed)
    t0 = time.perf_counter()
    g, tally = cv_learn(default_sat_constraints(d.schema), d, k, seed)
    truth, got = scm.graph.skeleton(), g.skeleton()
    return {
        "recall": len(truth & got) / len(truth),
        "spurious": len(got - truth),
        "oriented": len(scm.graph.edges & g.edges) / len(scm.graph.edges),
        "dropped": len(tally.dropped),
        "seconds": time.perf_counter() - t0,
    }


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=Config().sizes)
    p.add_argument("--seeds", type=int, default=Config.seeds)
    p.add_argument("--k", type=int, default=Config.k)
    args = p.parse_args()
    cfg = Config(args.sizes, args.seeds, args.k)
    print(f"{'n':>8s} {'recall':>7s} {'spurious':>9s} {'oriented':>9s} {'dropped':>8s} {'sec':>6s}")
    for n in cfg.sizes:
        runs = [score(n, s, cfg.k) for s in range(cfg.seeds)]
        mean = {key: float(np.mean([r[key] for r in runs])) for key in runs[0]}
        print(
            f"{n:8d} {mean['recall']:7.3f} {mean['spurious']:9.1f} {mean['oriented']:9.3f} "
            f"{mean['dropped']:8.1f} {mean['seconds']:6.2f}"
        )


if __name__ == "__main__":
    main()
