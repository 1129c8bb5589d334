"""Check identified estimands against the interventional ground truth.

Draws small benchmark-style instances, fits random models compatible with
their labels, and compares every estimand value with the truncated
factorization computed from the model itself. Exits 1 on any mismatch.

    python scripts/soundness_sweep.py --instances 2000 --models 5
"""

import argparse
import itertools
import sys
import time

import numpy as np

from csiid.bench import BenchConfig, instance_seed, random_instance
from csiid.csi import identify_csi
from csiid.distributions import Evaluator, interventional, joint, random_model
from csiid.estimand import is_identified, render


def check(inst, m) -> list[str]:
    g = inst.graph
    t, s = sorted(inst.treatment), sorted(inst.outcome)
    e = identify_csi(g, inst.labels, inst.controls, t, s)
    if not is_identified(e):
        return []
    ev = Evaluator(e, joint(m))
    bad = []
    for tv in itertools.product(*(range(g.domain(v)) for v in t)):
        truth = interventional(m, dict(zip(t, tv)), s)
        for sv in itertools.product(*(range(g.domain(v)) for v in s)):
            got = ev({**dict(zip(t, tv)), **dict(zip(s, sv))})
            if got != truth.table[sv]:
                bad.append(f"t={tv} s={sv}: {got} != {truth.table[sv]} for {render(e)}")
    return bad


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--models", type=int, default=5)
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=9)
    p.add_argument("--edge-prob", default="0.4")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    sizes = list(range(args.n_min, args.n_max + 1))
    cfg = BenchConfig(n_values=tuple(sizes), repetitions=1, seed=args.seed, edge_prob=args.edge_prob)
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    identified = failures = 0
    for i in range(args.instances):
        n = sizes[i % len(sizes)]
        inst = random_instance(cfg, n, instance_seed(args.seed, n, i))
        if is_identified(identify_csi(inst.graph, inst.labels, inst.controls, inst.treatment, inst.outcome)):
            identified += 1
        for _ in range(args.models):
            for msg in check(inst, random_model(inst.graph, rng, inst.labels)):
                failures += 1
                print(f"instance {i} (n={n}): {msg}", file=sys.stderr)
    dt = time.perf_counter() - t0
    print(f"{args.instances} instances, {identified} identified, {failures} mismatches, {dt:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
