"""Causal effect identification from a single DAG with latent variables.

The DAG is first reduced to an acyclic directed mixed graph over its observed
vertices (latent projection). Identification then follows the c-component
decomposition: the target is expressed through Q-factors Q[S] = P_{v\\s}(s),
each computed from the observational distribution and pruned by the
recursive ``_identify_q`` routine, which fails exactly when the remaining
c-component cannot be reduced further.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable

from .errors import PreconditionError
from .estimand import (
    ONE,
    Estimand,
    NonIdentifiable,
    Ordering,
    prob,
    product,
    quotient,
    summation,
)
from .graph import CausalGraph


@dataclass(frozen=True)
class Admg:
    vertices: tuple[str, ...]
    directed: frozenset[tuple[str, str]]
    bidirected: frozenset[frozenset[str]]
    _pa: dict = field(init=False, repr=False, compare=False)
    _sib: dict = field(init=False, repr=False, compare=False)
    _topo: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vs = set(self.vertices)
        pa = {v: set() for v in self.vertices}
        ch = {v: set() for v in self.vertices}
        sib = {v: set() for v in self.vertices}
        for a, b in self.directed:
            if a == b or a not in vs or b not in vs:
                raise PreconditionError(f"bad directed edge {a}->{b}")
            pa[b].add(a)
            ch[a].add(b)
        for pair in self.bidirected:
            if len(pair) != 2 or not pair <= vs:
                raise PreconditionError(f"bad bidirected edge {set(pair)}")
            a, b = tuple(pair)
            sib[a].add(b)
            sib[b].add(a)
        pos = {v: i for i, v in enumerate(self.vertices)}
        indeg = {v: len(pa[v]) for v in self.vertices}
        heap = [pos[v] for v in self.vertices if not indeg[v]]
        heapq.heapify(heap)
        topo = []
        while heap:
            v = self.vertices[heapq.heappop(heap)]
            topo.append(v)
            for c in ch[v]:
                indeg[c] -= 1
                if not indeg[c]:
                    heapq.heappush(heap, pos[c])
        if len(topo) != len(self.vertices):
            raise PreconditionError("directed part of the mixed graph is cyclic")
        object.__setattr__(self, "_pa", {k: frozenset(v) for k, v in pa.items()})
        object.__setattr__(self, "_sib", {k: frozenset(v) for k, v in sib.items()})
        object.__setattr__(self, "_topo", tuple(topo))

    @classmethod
    def from_edges(cls, vertices: Iterable[str], directed=(), bidirected=()) -> "Admg":
        return cls(
            tuple(vertices),
            frozenset(tuple(e) for e in directed),
            frozenset(frozenset(e) for e in bidirected),
        )

    def parents(self, v: str) -> frozenset[str]:
        return self._pa[v]

    def siblings(self, v: str) -> frozenset[str]:
        return self._sib[v]

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def ancestors(self, xs: Iterable[str], within: Iterable[str] = None) -> frozenset[str]:
        """Ancestors of ``xs`` in the subgraph induced by ``within``."""
        within = set(self.vertices) if within is None else set(within)
        seen = set(xs)
        stack = list(seen)
        while stack:
            for p in self._pa[stack.pop()]:
                if p in within and p not in seen:
                    seen.add(p)
                    stack.append(p)
        return frozenset(seen)

    def c_components(self, within: Iterable[str] = None) -> list[frozenset[str]]:
        """Connected components of the bidirected part of the induced
        subgraph, listed in topological order of their first vertex."""
        within = set(self.vertices) if within is None else set(within)
        comps, assigned = [], set()
        for v in self._topo:
            if v not in within or v in assigned:
                continue
            comp, stack = {v}, [v]
            while stack:
                for s in self._sib[stack.pop()]:
                    if s in within and s not in comp:
                        comp.add(s)
                        stack.append(s)
            assigned |= comp
            comps.append(frozenset(comp))
        return comps


def latent_project(g: CausalGraph) -> Admg:
    """Project ``g`` onto its observed vertices."""
    observed = g.observed
    directed = set()
    for a in observed:
        for b in _observed_reach(g, a):
            directed.add((a, b))
    bidirected = set()
    for u in g.latent:
        hits = sorted(_observed_reach(g, u), key=g.position)
        for i, a in enumerate(hits):
            for b in hits[i + 1 :]:
                bidirected.add(frozenset((a, b)))
    return Admg(observed, frozenset(directed), frozenset(bidirected))


def _observed_reach(g: CausalGraph, src: str) -> set[str]:
    """Observed vertices reachable from ``src`` by directed paths whose
    interior vertices are all latent."""
    out, seen = set(), set()
    stack = list(g.children(src))
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        if g.is_observed(v):
            out.add(v)
        else:
            stack.extend(g.children(v))
    return out


def c_components(a: Admg) -> list[frozenset[str]]:
    return a.c_components()


class _NotIdentifiable(Exception):
    pass


def identify(a: Admg, treatment: Iterable[str], outcome: Iterable[str]) -> Estimand:
    """Estimand for P_t(s) over observational terms, or NonIdentifiable."""
    t, s = frozenset(treatment), frozenset(outcome)
    if not t or not s:
        raise PreconditionError("treatment and outcome must be non-empty")
    if t & s:
        raise PreconditionError(f"treatment and outcome overlap on {sorted(t & s)}")
    unknown = (t | s) - set(a.vertices)
    if unknown:
        raise PreconditionError(f"not observed vertices of the graph: {sorted(unknown)}")

    order = Ordering(a.topological_order())
    rest = set(a.vertices) - t
    d = a.ancestors(s, within=rest)
    factors = []
    try:
        for d_i in a.c_components(within=d):
            s_j = next(c for c in a.c_components() if d_i <= c)
            q = _q_from_observational(a, s_j, order)
            factors.append(_identify_q(a, d_i, s_j, q, order))
    except _NotIdentifiable as exc:
        return NonIdentifiable(str(exc))
    expr = summation(d - s, product(factors, order), order)
    extra = expr.free - (t | s)
    if extra:
        # Q-factors are constant in these variables; averaging over their
        # observed marginal removes them without changing the value.
        expr = summation(extra, product([prob(extra, (), (), order), expr], order), order)
    return expr


def _q_from_observational(a: Admg, comp: frozenset[str], order: Ordering) -> Estimand:
    """Q[comp] for a c-component of the whole graph, one conditional per
    vertex, each conditioned on its c-component in the topological prefix
    and that component's parents."""
    topo = a.topological_order()
    factors = []
    prefix: list[str] = []
    for v in topo:
        prefix.append(v)
        if v not in comp:
            continue
        t_i = next(c for c in a.c_components(within=prefix) if v in c)
        cond = set(t_i)
        for w in t_i:
            cond |= a.parents(w)
        factors.append(prob({v}, cond - {v}, (), order))
    return product(factors, order)


def _identify_q(a: Admg, c: frozenset[str], t: frozenset[str], q_t: Estimand, order: Ordering) -> Estimand:
    """Q[c] from Q[t], for ``c`` inside the c-component ``t``."""
    while True:
        anc = a.ancestors(c, within=t)
        if anc == c:
            return summation(t - c, q_t, order)
        if anc == t:
            raise _NotIdentifiable(
                f"c-component {{{', '.join(order(t))}}} is ancestral to "
                f"{{{', '.join(order(c))}}} and cannot be reduced"
            )
        q_a = summation(t - anc, q_t, order)
        t_prime = next(comp for comp in a.c_components(within=anc) if c <= comp)
        q_t = _q_from_ancestral(a, anc, t_prime, q_a, order)
        t = t_prime


def _q_from_ancestral(a: Admg, h: frozenset[str], comp: frozenset[str], q_h: Estimand, order: Ordering) -> Estimand:
    """Q[comp] for a c-component of G[h] from Q[h], as a telescoping product
    of ratios of prefix marginals of Q[h]."""
    topo = [v for v in a.topological_order() if v in h]
    prefixes = [ONE]
    for i in range(1, len(topo) + 1):
        prefixes.append(summation(set(topo[i:]), q_h, order))
    factors = []
    for i, v in enumerate(topo, 1):
        if v in comp:
            factors.append(quotient(prefixes[i], prefixes[i - 1], order))
    return product(factors, order)
