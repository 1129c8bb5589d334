"""Identification with context-specific labels, and learning labels from an
observational distribution."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable

from .distributions import JointTable, check_positive, csi_holds
from .errors import PreconditionError
from .estimand import Estimand, NonIdentifiable, is_identified, mixture, with_context
from .graph import CausalGraph, Edge
from .identification import identify, latent_project
from .labels import ControlSpec, LabelSet, normalize
from .separation import verma_equivalence_check


def context_graph(g: CausalGraph, l: LabelSet, ctx) -> CausalGraph:
    """The graph over non-control vertices with the context's labels removed."""
    controls = set(l.controls)
    h = g.restrict(v for v in g.names if v not in controls)
    return h.delete_edges(e for e in l[ctx] if e[0] not in controls and e[1] not in controls)


def identify_csi(
    g: CausalGraph,
    l: LabelSet,
    c_spec: ControlSpec,
    treatment: Iterable[str],
    outcome: Iterable[str],
    threads: int = 1,
) -> Estimand:
    """P_t(s) as a mixture over control contexts, or NonIdentifiable naming
    the first failing context in lexicographic order."""
    t, s = frozenset(treatment), frozenset(outcome)
    c_spec.validate(g)
    controls = set(c_spec.controls)
    if not t or not s:
        raise PreconditionError("treatment and outcome must be non-empty")
    if t & s:
        raise PreconditionError(f"treatment and outcome overlap on {sorted(t & s)}")
    if (t | s) & controls:
        raise PreconditionError(f"treatment/outcome may not contain control variables: {sorted((t | s) & controls)}")
    for v in t | s:
        if not g.is_observed(v):
            raise PreconditionError(f"{v} is latent")

    g, l = normalize(g, l, c_spec)
    contexts = l.contexts()

    def solve(ctx):
        return identify(latent_project(context_graph(g, l, ctx)), t, s)

    if threads > 1 and len(contexts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, contexts))
    else:
        results = []
        for ctx in contexts:
            results.append(solve(ctx))
            if not is_identified(results[-1]):
                break

    branches = []
    for ctx, r in zip(contexts, results):
        assign = tuple(zip(l.controls, ctx))
        if not is_identified(r):
            where = ", ".join(f"{k}={v}" for k, v in assign) or "(no controls)"
            return NonIdentifiable(f"not identifiable in context {where}: {r.witness}")
        branches.append((assign, with_context(r, assign)))
    return mixture(branches)


def eligible_edges(g: CausalGraph, c_spec: ControlSpec) -> list[Edge]:
    """Edges that may carry a label: both endpoints observed, neither a control."""
    controls = set(c_spec.controls)
    return [
        (p, c)
        for p, c in g.edges
        if g.is_observed(p) and g.is_observed(c) and p not in controls and c not in controls
    ]


def learn_labels(
    g: CausalGraph,
    joint: JointTable,
    c_spec: ControlSpec,
    allow_degenerate: bool = False,
    tol=None,
) -> LabelSet:
    """Label (Y, X) at context c when X is independent of Y given C=c and
    the observed ancestors of {X, Y} outside C.

    Only this one conditioning set is tested, so labels that hold only for
    some other set are not found."""
    c_spec.validate(g)
    if set(joint.variables) != set(g.observed):
        raise PreconditionError(
            f"joint is over {sorted(joint.variables)}, graph observes {sorted(g.observed)}"
        )
    check_positive(joint, allow_degenerate)
    controls = set(c_spec.controls)
    observed = set(g.observed)
    edges = eligible_edges(g, c_spec)
    cond = {
        (y, x): g.sort((g.ancestors((x, y)) & observed) - controls - {x, y})
        for y, x in edges
    }
    out = {}
    for ctx in c_spec.contexts(g):
        assign = c_spec.as_dict(ctx)
        out[ctx] = [(y, x) for y, x in edges if csi_holds(joint, x, y, assign, cond[(y, x)], tol)]
    return LabelSet.build(g, c_spec, out)


def learnable(g: CausalGraph, edge: Edge) -> bool:
    """Whether a mechanism-level deletion of ``edge`` is guaranteed to be
    recovered by :func:`learn_labels`."""
    y, x = edge
    if not g.has_edge(y, x):
        raise PreconditionError(f"{y}->{x} is not an edge")
    if not (g.is_observed(x) and g.is_observed(y)):
        return False
    return verma_equivalence_check(g.delete_edges({edge}), x, y)
