"""Context-specific label sets over control variables and their
maximal-regular normal form."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import LabelError, ParseError, PreconditionError
from .graph import CausalGraph, Edge

Context = tuple[int, ...]


@dataclass(frozen=True)
class ControlSpec:
    """Ordered set of control variables (observed roots)."""

    controls: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        if len(set(self.controls)) != len(self.controls):
            raise LabelError("duplicate control variable")

    def validate(self, g: CausalGraph) -> None:
        roots = set(g.observed_roots())
        for c in self.controls:
            if c not in g:
                raise LabelError(f"control {c} is not a vertex")
            if c not in roots:
                raise LabelError(f"control {c} is not an observed root")

    def domains(self, g: CausalGraph) -> tuple[int, ...]:
        return tuple(g.domain(c) for c in self.controls)

    def contexts(self, g: CausalGraph) -> list[Context]:
        """Full product domain in lexicographic order."""
        return list(itertools.product(*(range(k) for k in self.domains(g))))

    def as_dict(self, ctx: Context) -> dict[str, int]:
        return dict(zip(self.controls, ctx))


class LabelSet:
    """Per-context sets of removable edges.

    Every context of the product domain is materialized, possibly with an
    empty edge set. Instances are immutable.
    """

    __slots__ = ("controls", "domains", "_labels")

    def __init__(self, controls: Iterable[str], domains: Iterable[int], labels: Mapping[Context, Iterable[Edge]] = None):
        self.controls = tuple(controls)
        self.domains = tuple(domains)
        if len(self.controls) != len(self.domains):
            raise LabelError("controls and domains differ in length")
        full = {ctx: frozenset() for ctx in itertools.product(*(range(k) for k in self.domains))}
        for ctx, edges in (labels or {}).items():
            ctx = tuple(ctx)
            if ctx not in full:
                raise LabelError(f"context {ctx} is not a complete assignment of {self.controls}")
            full[ctx] = frozenset(tuple(e) for e in edges)
        self._labels = full

    @classmethod
    def empty(cls, g: CausalGraph, c_spec: ControlSpec) -> "LabelSet":
        return cls(c_spec.controls, c_spec.domains(g))

    @classmethod
    def build(cls, g: CausalGraph, c_spec: ControlSpec, labels: Mapping) -> "LabelSet":
        """Build from a mapping whose keys are context tuples or dicts."""
        converted = {}
        for ctx, edges in labels.items():
            if isinstance(ctx, Mapping):
                if set(ctx) != set(c_spec.controls):
                    raise LabelError(f"context {dict(ctx)} does not assign exactly {c_spec.controls}")
                ctx = tuple(ctx[c] for c in c_spec.controls)
            converted[tuple(ctx)] = edges
        out = cls(c_spec.controls, c_spec.domains(g), converted)
        out.validate(g)
        return out

    def contexts(self) -> list[Context]:
        return list(self._labels)

    def __getitem__(self, ctx) -> frozenset[Edge]:
        if isinstance(ctx, Mapping):
            ctx = tuple(ctx[c] for c in self.controls)
        return self._labels[tuple(ctx)]

    def items(self):
        return self._labels.items()

    def all_edges(self) -> frozenset[Edge]:
        return frozenset().union(*self._labels.values()) if self._labels else frozenset()

    def is_empty(self) -> bool:
        return not any(self._labels.values())

    def replace(self, labels: Mapping[Context, Iterable[Edge]]) -> "LabelSet":
        return LabelSet(self.controls, self.domains, labels)

    def __eq__(self, other):
        if not isinstance(other, LabelSet):
            return NotImplemented
        return (self.controls, self.domains, self._labels) == (other.controls, other.domains, other._labels)

    def __hash__(self):
        return hash((self.controls, self.domains, frozenset(self._labels.items())))

    def __repr__(self):
        body = ", ".join(f"{ctx}: {sorted(es)}" for ctx, es in self._labels.items() if es)
        return f"LabelSet({self.controls}, {{{body}}})"

    def validate(self, g: CausalGraph) -> None:
        c_spec = ControlSpec(self.controls)
        c_spec.validate(g)
        if c_spec.domains(g) != self.domains:
            raise LabelError("label-set domains disagree with the graph")
        controls = set(self.controls)
        for ctx, edges in self._labels.items():
            for p, c in edges:
                if not g.has_edge(p, c):
                    raise LabelError(f"labeled edge {p}->{c} is not in the graph")
                if p in controls or c in controls:
                    raise LabelError(f"labeled edge {p}->{c} touches a control variable")

    def check(self, c_spec: ControlSpec) -> None:
        if tuple(c_spec.controls) != self.controls:
            raise PreconditionError(f"label set is over {self.controls}, not {c_spec.controls}")


def _control_parents(g: CausalGraph, x: str, controls) -> tuple[int, ...]:
    """Positions (within the control tuple) of the controls that are parents of ``x``."""
    pa = set(g.parents(x))
    return tuple(i for i, c in enumerate(controls) if c in pa)


def regularize(g: CausalGraph, l: LabelSet, c_spec: ControlSpec) -> tuple[CausalGraph, LabelSet]:
    """Delete every labeled edge whose child has no control parent, from the
    graph and from all contexts."""
    l.check(c_spec)
    l.validate(g)
    while True:
        doomed = {e for e in l.all_edges() if not _control_parents(g, e[1], l.controls)}
        if not doomed:
            return g, l
        g = g.delete_edges(doomed)
        l = l.replace({ctx: es - doomed for ctx, es in l.items()})


def is_regular(g: CausalGraph, l: LabelSet) -> bool:
    return all(_control_parents(g, e[1], l.controls) for e in l.all_edges())


def maximalize(g: CausalGraph, l: LabelSet, c_spec: ControlSpec) -> LabelSet:
    """Copy every label to all contexts that agree with it on the child's
    control parents."""
    l.check(c_spec)
    if not is_regular(g, l):
        raise PreconditionError("maximalize needs a regular label set; call regularize first")
    out = {ctx: set(es) for ctx, es in l.items()}
    # one pass reaches the fixpoint: propagation is keyed on the source
    # context's restriction, which every target shares
    for ctx, edges in l.items():
        for e in edges:
            idx = _control_parents(g, e[1], l.controls)
            key = tuple(ctx[i] for i in idx)
            for other in out:
                if tuple(other[i] for i in idx) == key:
                    out[other].add(e)
    result = l.replace(out)
    assert _maximal(g, result), "maximalize did not reach a fixpoint"
    return result


def _maximal(g, l) -> bool:
    for ctx, edges in l.items():
        for e in edges:
            idx = _control_parents(g, e[1], l.controls)
            key = tuple(ctx[i] for i in idx)
            for other, es in l.items():
                if tuple(other[i] for i in idx) == key and e not in es:
                    return False
    return True


def is_maximal_regular(g: CausalGraph, l: LabelSet, c_spec: ControlSpec) -> bool:
    l.check(c_spec)
    return is_regular(g, l) and _maximal(g, l)


def normalize(g: CausalGraph, l: LabelSet, c_spec: ControlSpec) -> tuple[CausalGraph, LabelSet]:
    g, l = regularize(g, l, c_spec)
    return g, maximalize(g, l, c_spec)


# -- label file format ---------------------------------------------------------

_LABEL = re.compile(r"^label\s+(\S+)\s+remove\s+([A-Za-z0-9_]+)->([A-Za-z0-9_]+)$")


def parse_labels(text: str, g: CausalGraph) -> tuple[ControlSpec, LabelSet]:
    """Parse ``control <name>`` lines followed by
    ``label <c>=<v>[,<c>=<v>...] remove <parent>-><child>`` lines."""
    controls: list[str] = []
    entries: dict[Context, set] = {}
    seen_label = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "control":
            if seen_label:
                raise ParseError("control declarations must precede labels", lineno)
            if len(toks) != 2:
                raise ParseError("expected 'control <name>'", lineno)
            name = toks[1]
            if name not in g:
                raise ParseError(f"unknown control variable {name}", lineno)
            if name in controls:
                raise ParseError(f"duplicate control {name}", lineno)
            controls.append(name)
        elif toks[0] == "label":
            seen_label = True
            m = _LABEL.match(line)
            if not m:
                raise ParseError("expected 'label <c>=<v>[,...] remove <parent>-><child>'", lineno)
            assign = {}
            for part in m.group(1).split(","):
                if "=" not in part:
                    raise ParseError(f"bad context assignment {part!r}", lineno)
                k, v = part.split("=", 1)
                if k not in controls:
                    raise ParseError(f"{k} is not a declared control", lineno)
                if k in assign:
                    raise ParseError(f"{k} assigned twice", lineno)
                try:
                    val = int(v)
                except ValueError:
                    raise ParseError(f"non-integer value {v!r}", lineno) from None
                if not 0 <= val < g.domain(k):
                    raise ParseError(f"value {val} outside domain of {k}", lineno)
                assign[k] = val
            if set(assign) != set(controls):
                missing = [c for c in controls if c not in assign]
                raise ParseError(f"partial context; missing {', '.join(missing)}", lineno)
            edge = (m.group(2), m.group(3))
            if not (edge[0] in g and edge[1] in g and g.has_edge(*edge)):
                raise ParseError(f"edge {edge[0]}->{edge[1]} is not in the graph", lineno)
            if edge[0] in controls or edge[1] in controls:
                raise ParseError(f"edge {edge[0]}->{edge[1]} touches a control variable", lineno)
            entries.setdefault(tuple(assign[c] for c in controls), set()).add(edge)
        else:
            raise ParseError(f"unknown directive {toks[0]!r}", lineno)
    c_spec = ControlSpec(tuple(controls))
    try:
        c_spec.validate(g)
    except LabelError as exc:
        raise ParseError(str(exc)) from None
    return c_spec, LabelSet.build(g, c_spec, entries)


def format_labels(g: CausalGraph, l: LabelSet) -> str:
    lines = [f"control {c}" for c in l.controls]
    order = {name: i for i, name in enumerate(g.names)}
    for ctx, edges in l.items():
        assign = ",".join(f"{c}={v}" for c, v in zip(l.controls, ctx))
        for p, c in sorted(edges, key=lambda e: (order[e[0]], order[e[1]])):
            lines.append(f"label {assign} remove {p}->{c}")
    return "\n".join(lines) + ("\n" if lines else "")
