"""Immutable causal DAGs over named, finitely-valued variables.

A :class:`CausalGraph` keeps vertices in declaration order; every set-valued
query that returns an ordered container uses that order, so anything derived
from a graph serializes deterministically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import GraphError, ParseError, PreconditionError, UnknownVariableError

Edge = tuple[str, str]

_NAME = re.compile(r"^[A-Za-z0-9_]+$")


@dataclass(frozen=True)
class Variable:
    name: str
    observed: bool = True
    domain: int = 2

    def __post_init__(self):
        if not isinstance(self.name, str) or not _NAME.match(self.name):
            raise GraphError(f"invalid variable name {self.name!r}")
        if int(self.domain) < 2:
            raise GraphError(f"variable {self.name}: domain size must be >= 2, got {self.domain}")


class CausalGraph:
    """A DAG with observability flags and domain sizes.

    Instances are never mutated; edge deletion, restriction and mutilation
    return new graphs.
    """

    __slots__ = ("variables", "names", "edges", "_index", "_vars", "_parents", "_children", "_topo")

    def __init__(self, variables: Iterable[Variable], edges: Iterable[Edge] = ()):
        variables = tuple(variables)
        index = {}
        for i, v in enumerate(variables):
            if v.name in index:
                raise GraphError(f"duplicate variable {v.name}")
            index[v.name] = i
        parents = {v.name: [] for v in variables}
        children = {v.name: [] for v in variables}
        seen = set()
        for p, c in edges:
            if p not in index or c not in index:
                missing = p if p not in index else c
                raise GraphError(f"edge {p}->{c} references undeclared vertex {missing}")
            if p == c:
                raise GraphError(f"self-loop on {p}")
            if (p, c) in seen:
                raise GraphError(f"duplicate edge {p}->{c}")
            seen.add((p, c))
            parents[c].append(p)
            children[p].append(c)

        self.variables = variables
        self.names = tuple(v.name for v in variables)
        self._index = index
        self._vars = {v.name: v for v in variables}
        self._parents = {k: tuple(sorted(ps, key=index.__getitem__)) for k, ps in parents.items()}
        self._children = {k: tuple(sorted(cs, key=index.__getitem__)) for k, cs in children.items()}
        self.edges = tuple(sorted(seen, key=lambda e: (index[e[0]], index[e[1]])))
        self._topo = self._toposort()

    def _toposort(self):
        # Kahn's algorithm, ties broken by declaration order.
        import heapq

        indeg = {v: len(self._parents[v]) for v in self.names}
        heap = [self._index[v] for v in self.names if indeg[v] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            v = self.names[heapq.heappop(heap)]
            order.append(v)
            for c in self._children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, self._index[c])
        if len(order) != len(self.names):
            stuck = [v for v in self.names if indeg[v] > 0]
            raise GraphError(f"graph has a directed cycle through {', '.join(stuck)}")
        return tuple(order)

    # -- basic lookups -----------------------------------------------------

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return self.variables == other.variables and set(self.edges) == set(other.edges)

    def __hash__(self):
        return hash((self.variables, frozenset(self.edges)))

    def __repr__(self):
        return f"CausalGraph({len(self.names)} vertices, {len(self.edges)} edges)"

    def _check(self, names):
        for x in names:
            if x not in self._index:
                raise UnknownVariableError(f"unknown vertex {x!r}")

    def var(self, name: str) -> Variable:
        self._check((name,))
        return self._vars[name]

    def domain(self, name: str) -> int:
        return self.var(name).domain

    def is_observed(self, name: str) -> bool:
        return self.var(name).observed

    def position(self, name: str) -> int:
        self._check((name,))
        return self._index[name]

    def sort(self, names: Iterable[str]) -> tuple[str, ...]:
        """Return ``names`` as a tuple in declaration order."""
        names = set(names)
        self._check(names)
        return tuple(sorted(names, key=self._index.__getitem__))

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.observed)

    @property
    def latent(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if not v.observed)

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def has_edge(self, parent: str, child: str) -> bool:
        return parent in self._parents.get(child, ())

    def adjacent(self, a: str, b: str) -> bool:
        return self.has_edge(a, b) or self.has_edge(b, a)

    # -- graph primitives --------------------------------------------------

    def parents(self, x: str) -> tuple[str, ...]:
        self._check((x,))
        return self._parents[x]

    def children(self, x: str) -> tuple[str, ...]:
        self._check((x,))
        return self._children[x]

    def ancestors(self, xs: Iterable[str]) -> frozenset[str]:
        """Union of ancestor sets; every vertex counts as its own ancestor."""
        xs = set(xs)
        self._check(xs)
        seen = set(xs)
        stack = list(xs)
        while stack:
            for p in self._parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return frozenset(seen)

    def descendants(self, xs: Iterable[str]) -> frozenset[str]:
        xs = set(xs)
        self._check(xs)
        seen = set(xs)
        stack = list(xs)
        while stack:
            for c in self._children[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return frozenset(seen)

    def observed_roots(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.observed and not self._parents[v.name])

    def delete_edges(self, es: Iterable[Edge]) -> "CausalGraph":
        es = set(es)
        for e in es:
            if not self.has_edge(*e):
                raise PreconditionError(f"cannot delete absent edge {e[0]}->{e[1]}")
        if not es:
            return self
        return CausalGraph(self.variables, (e for e in self.edges if e not in es))

    def restrict(self, keep: Iterable[str]) -> "CausalGraph":
        keep = set(keep)
        self._check(keep)
        if len(keep) == len(self.names):
            return self
        return CausalGraph(
            (v for v in self.variables if v.name in keep),
            (e for e in self.edges if e[0] in keep and e[1] in keep),
        )

    def mutilate(self, cut_in: Iterable[str] = (), cut_out: Iterable[str] = ()) -> "CausalGraph":
        """Drop in-edges of ``cut_in`` and out-edges of ``cut_out``."""
        cut_in, cut_out = set(cut_in), set(cut_out)
        self._check(cut_in | cut_out)
        if not cut_in and not cut_out:
            return self
        return CausalGraph(
            self.variables,
            (e for e in self.edges if e[1] not in cut_in and e[0] not in cut_out),
        )

    def with_edges(self, extra: Iterable[Edge]) -> "CausalGraph":
        return CausalGraph(self.variables, list(self.edges) + list(extra))


def make_graph(observed="", latent="", edges="", domains=None) -> CausalGraph:
    """Compact constructor used by tests and the catalog.

    >>> g = make_graph("X Y", "U", "U->X U->Y X->Y")
    >>> g.parents("Y")
    ('X', 'U')
    """
    domains = domains or {}
    obs = observed.split() if isinstance(observed, str) else list(observed)
    lat = latent.split() if isinstance(latent, str) else list(latent)
    variables = [Variable(n, True, domains.get(n, 2)) for n in obs]
    variables += [Variable(n, False, domains.get(n, 2)) for n in lat]
    if isinstance(edges, str):
        edges = [tuple(tok.split("->")) for tok in edges.split()]
    return CausalGraph(variables, edges)


# -- text format -------------------------------------------------------------


def parse_graph(text: str) -> CausalGraph:
    """Parse the line-based graph format.

    ``var <name> observed|latent [domain=<k>]`` and ``edge <parent> <child>``;
    ``#`` starts a comment. Every error reports its line number.
    """
    variables: list[Variable] = []
    names: dict[str, int] = {}
    edges: list[Edge] = []
    children: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "var":
            if len(toks) not in (3, 4):
                raise ParseError("expected 'var <name> observed|latent [domain=<k>]'", lineno)
            name, kind = toks[1], toks[2]
            if kind not in ("observed", "latent"):
                raise ParseError(f"unknown visibility {kind!r}", lineno)
            if name in names:
                raise ParseError(f"duplicate variable {name}", lineno)
            domain = 2
            if len(toks) == 4:
                m = re.fullmatch(r"domain=(\d+)", toks[3])
                if not m:
                    raise ParseError(f"bad domain spec {toks[3]!r}", lineno)
                domain = int(m.group(1))
            try:
                variables.append(Variable(name, kind == "observed", domain))
            except GraphError as exc:
                raise ParseError(str(exc), lineno) from None
            names[name] = lineno
            children[name] = []
        elif toks[0] == "edge":
            if len(toks) != 3:
                raise ParseError("expected 'edge <parent> <child>'", lineno)
            p, c = toks[1], toks[2]
            for v in (p, c):
                if v not in names:
                    raise ParseError(f"edge references undeclared variable {v}", lineno)
            if p == c:
                raise ParseError(f"self-loop on {p}", lineno)
            if (p, c) in edges:
                raise ParseError(f"duplicate edge {p} {c}", lineno)
            if _reaches(children, c, p):
                raise ParseError(f"edge {p} {c} closes a directed cycle", lineno)
            edges.append((p, c))
            children[p].append(c)
        else:
            raise ParseError(f"unknown directive {toks[0]!r}", lineno)
    return CausalGraph(variables, edges)


def _reaches(children, src, dst) -> bool:
    stack, seen = [src], {src}
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        for c in children[v]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def format_graph(g: CausalGraph) -> str:
    lines = []
    for v in g.variables:
        kind = "observed" if v.observed else "latent"
        suffix = f" domain={v.domain}" if v.domain != 2 else ""
        lines.append(f"var {v.name} {kind}{suffix}")
    lines += [f"edge {p} {c}" for p, c in g.edges]
    return "\n".join(lines) + "\n"
