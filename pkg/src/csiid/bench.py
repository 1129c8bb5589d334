"""Random Erdős–Rényi benchmark: labeled identification vs plain identification."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .csi import identify_csi
from .errors import PreconditionError
from .estimand import is_identified
from .graph import CausalGraph, Variable
from .identification import identify, latent_project
from .labels import ControlSpec, LabelSet

CSV_HEADER = ("n", "algorithm", "mean_runtime_s", "ci_low", "ci_high", "pct_identifiable")


@dataclass(frozen=True)
class BenchConfig:
    n_values: tuple[int, ...] = (30, 40, 50, 60, 70, 80, 90, 100)
    repetitions: int = 1000
    seed: int = 0
    p_observed: float = 0.7
    p_control: float = 0.8
    p_no_label: float = 0.2
    edge_prob: str = "log"  # "log" -> log(n)/n, or a float literal
    timing: bool = True
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        for name in ("p_observed", "p_control", "p_no_label"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise PreconditionError(f"{name} must lie in [0, 1], got {p}")
        if not self.n_values or min(self.n_values) < 3:
            raise PreconditionError("every n must be at least 3")
        if self.repetitions < 1:
            raise PreconditionError("repetitions must be at least 1")
        if self.threads < 1:
            raise PreconditionError("threads must be at least 1")
        self.p_edge(3)

    def p_edge(self, n: int) -> float:
        if self.edge_prob == "log":
            return math.log(n) / n
        try:
            p = float(self.edge_prob)
        except ValueError:
            raise PreconditionError(f"bad edge probability rule {self.edge_prob!r}") from None
        if not 0.0 <= p <= 1.0:
            raise PreconditionError(f"edge probability must lie in [0, 1], got {p}")
        return p


@dataclass
class Instance:
    graph: CausalGraph
    labels: LabelSet
    controls: ControlSpec
    treatment: frozenset
    outcome: frozenset


def instance_seed(seed: int, n: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed ^ index, n])


def random_instance(cfg: BenchConfig, n: int, seed) -> Instance:
    """One random (graph, labels, controls, treatment, outcome) draw."""
    rng = np.random.default_rng(seed)
    while True:
        inst = _draw(cfg, n, rng)
        if inst is not None:
            return inst


def _draw(cfg: BenchConfig, n: int, rng) -> Instance | None:
    p = cfg.p_edge(n)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    rank = np.empty(n, dtype=int)
    rank[rng.permutation(n)] = np.arange(n)
    observed = rng.random(n) < cfg.p_observed
    names = [f"V{i}" for i in range(n)]
    edges = []
    for i, j in zip(*np.nonzero(upper)):
        a, b = (i, j) if rank[i] < rank[j] else (j, i)
        edges.append((int(a), int(b)))
    has_parent = np.zeros(n, dtype=bool)
    for _, b in edges:
        has_parent[b] = True
    roots = [i for i in range(n) if observed[i] and not has_parent[i]]
    draws = rng.random(len(roots))
    controls = {r for r, u in zip(roots, draws) if u < cfg.p_control}

    variables = [Variable(names[i], bool(observed[i])) for i in range(n) if i not in controls]
    out_edges = set()
    for a, b in edges:
        src = "C" if a in controls else names[a]
        out_edges.add((src, names[b]))
    if controls:
        variables.append(Variable("C", True))
    g = CausalGraph(variables, sorted(out_edges))
    c_spec = ControlSpec(("C",) if controls else ())

    labels = {ctx: set() for ctx in c_spec.contexts(g)}
    if controls:
        n_ctx = len(labels)
        for y, x in g.edges:
            if y == "C" or "C" not in g.parents(x):
                continue
            if rng.random() < cfg.p_no_label:
                continue
            labels[(int(rng.integers(n_ctx)),)].add((y, x))
    l = LabelSet.build(g, c_spec, labels)

    rest = [v for v in g.observed if v != "C"]
    if len(rest) < 2:
        return None
    while True:
        side = rng.random(len(rest)) < 0.5
        t = frozenset(v for v, s in zip(rest, side) if s)
        s = frozenset(rest) - t
        if t and s:
            return Instance(g, l, c_spec, t, s)


@dataclass
class Trial:
    n: int
    csi_time: float
    plain_time: float
    csi_ok: bool
    plain_ok: bool


def run_trial(cfg: BenchConfig, n: int, index: int) -> Trial:
    inst = random_instance(cfg, n, instance_seed(cfg.seed, n, index))
    t0 = time.perf_counter()
    csi = identify_csi(inst.graph, inst.labels, inst.controls, inst.treatment, inst.outcome)
    t1 = time.perf_counter()
    plain = identify(latent_project(inst.graph), inst.treatment, inst.outcome)
    t2 = time.perf_counter()
    return Trial(n, t1 - t0, t2 - t1, is_identified(csi), is_identified(plain))


def _trial_args(args):
    return run_trial(*args)


@dataclass
class BenchReport:
    config: BenchConfig
    trials: list[Trial] = field(default_factory=list)

    def rows(self) -> list[tuple]:
        out = []
        for n in self.config.n_values:
            ts = [t for t in self.trials if t.n == n]
            for name, times, oks in (
                ("csi", [t.csi_time for t in ts], [t.csi_ok for t in ts]),
                ("plain", [t.plain_time for t in ts], [t.plain_ok for t in ts]),
            ):
                pct = 100.0 * sum(oks) / len(oks)
                if self.config.timing:
                    lo, hi = np.quantile(times, [0.1, 0.9], method="inverted_cdf")
                    out.append((n, name, float(np.mean(times)), float(lo), float(hi), pct))
                else:
                    out.append((n, name, None, None, None, pct))
        return out

    def monotonicity_violations(self) -> int:
        """Instances identified without labels but not with them."""
        return sum(1 for t in self.trials if t.plain_ok and not t.csi_ok)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for n, name, mean, lo, hi, pct in self.rows():
            fmt = lambda x: "NA" if x is None else f"{x:.6f}"
            w.writerow((n, name, fmt(mean), fmt(lo), fmt(hi), f"{pct:.2f}"))
        return buf.getvalue()

    def plot(self, prefix: str) -> list[str]:
        """Write runtime and identifiability panels; returns the file paths."""
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        rows = self.rows()
        paths = []
        panels = [("runtime", 2, "runtime (s)"), ("identifiable", 5, "% identifiable")]
        for tag, col, ylabel in panels:
            if tag == "runtime" and not self.config.timing:
                continue
            fig, ax = plt.subplots(figsize=(5, 3.5))
            for name, label in (("csi", "with labels"), ("plain", "graph only")):
                sel = [r for r in rows if r[1] == name]
                xs = [r[0] for r in sel]
                ax.plot(xs, [r[col] for r in sel], marker="o", label=label)
                if tag == "runtime":
                    ax.fill_between(xs, [r[3] for r in sel], [r[4] for r in sel], alpha=0.25)
            ax.set_xlabel("number of variables")
            ax.set_ylabel(ylabel)
            ax.legend()
            fig.tight_layout()
            path = f"{prefix}_{tag}.png"
            fig.savefig(path, dpi=120)
            plt.close(fig)
            paths.append(path)
        return paths


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    jobs = [(cfg, n, i) for n in cfg.n_values for i in range(cfg.repetitions)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            trials = list(pool.map(_trial_args, jobs, chunksize=8))
    else:
        trials = [run_trial(*job) for job in jobs]
    return BenchReport(cfg, trials)
