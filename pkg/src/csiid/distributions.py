"""Exact discrete models: joint tables, interventions, CSI tests and
estimand evaluation.

Probabilities are :class:`fractions.Fraction` unless a caller converts a
table with :meth:`JointTable.to_float`.
"""

from __future__ import annotations

import itertools
import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import (
    EvaluationError,
    GraphError,
    LabelError,
    ParseError,
    PreconditionError,
    SizingError,
    UnknownVariableError,
)
from .estimand import (
    ContextMixture,
    Estimand,
    NonIdentifiable,
    ObsProb,
    Product,
    Quotient,
    SumOver,
    render,
    variables as estimand_variables,
)
from .graph import CausalGraph, Variable
from .labels import ControlSpec, LabelSet

MAX_CELLS = 2**24
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class JointTable:
    """Dense table over full assignments of ``variables``."""

    variables: tuple[str, ...]
    domains: tuple[int, ...]
    table: Mapping[tuple[int, ...], object]
    _marginals: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "domains", tuple(self.domains))
        if len(set(self.variables)) != len(self.variables):
            raise PreconditionError("duplicate variable in joint table")
        cells = math.prod(self.domains)
        if cells > MAX_CELLS:
            raise SizingError(f"joint table needs {cells} cells (cap {MAX_CELLS})")
        for key, p in self.table.items():
            if p < 0:
                raise PreconditionError(f"negative probability at {key}")

    @property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.variables)}

    def domain(self, v: str) -> int:
        try:
            return self.domains[self.variables.index(v)]
        except ValueError:
            raise UnknownVariableError(f"variable {v!r} not in joint table") from None

    def total(self):
        return sum(self.table.values())

    def is_exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for p in self.table.values())

    def is_strictly_positive(self) -> bool:
        cells = math.prod(self.domains)
        return len(self.table) == cells and all(p > 0 for p in self.table.values())

    def to_float(self) -> "JointTable":
        return JointTable(self.variables, self.domains, {k: float(p) for k, p in self.table.items()})

    def marginal(self, vars: Iterable[str]) -> dict[tuple[int, ...], object]:
        """Marginal over ``vars`` (in the given order); cached."""
        vars = tuple(vars)
        cached = self._marginals.get(vars)
        if cached is not None:
            return cached
        idx = self.index
        for v in vars:
            if v not in idx:
                raise UnknownVariableError(f"variable {v!r} not in joint table")
        pos = [idx[v] for v in vars]
        zero = Fraction(0) if self.is_exact() else 0.0
        out = {k: zero for k in itertools.product(*(range(self.domains[i]) for i in pos))}
        for key, p in self.table.items():
            sub = tuple(key[i] for i in pos)
            out[sub] = out[sub] + p
        self._marginals[vars] = out
        return out

    def prob(self, assignment: Mapping[str, int]):
        vars = tuple(sorted(assignment))
        return self.marginal(vars)[tuple(assignment[v] for v in vars)]


@dataclass(frozen=True)
class Cpt:
    """P(child | parents). ``rows`` maps parent-value tuples to distributions."""

    parents: tuple[str, ...]
    rows: Mapping[tuple[int, ...], tuple]

    def __call__(self, parent_values: tuple[int, ...]) -> tuple:
        return self.rows[parent_values]


class DiscreteModel:
    """Bayesian network with exact CPTs over a :class:`CausalGraph`.

    ``labels`` optionally records context switches: for every edge (Y, X) in
    ``labels[c]`` the CPT of X must ignore Y on rows agreeing with c on X's
    control parents. This is verified on construction.
    """

    def __init__(self, graph: CausalGraph, cpts: Mapping[str, Cpt], labels: LabelSet | None = None):
        self.graph = graph
        self.cpts = dict(cpts)
        self.labels = labels
        for v in graph.variables:
            if v.name not in self.cpts:
                raise PreconditionError(f"missing CPT for {v.name}")
            cpt = self.cpts[v.name]
            if set(cpt.parents) != set(graph.parents(v.name)):
                raise PreconditionError(f"CPT parents of {v.name} disagree with the graph")
            shape = [graph.domain(p) for p in cpt.parents]
            expected = set(itertools.product(*(range(k) for k in shape)))
            if set(cpt.rows) != expected:
                raise PreconditionError(f"CPT of {v.name} must have one row per parent configuration")
            for key, row in cpt.rows.items():
                if len(row) != v.domain:
                    raise PreconditionError(f"CPT row {key} of {v.name} has {len(row)} entries, domain is {v.domain}")
                if any(p < 0 for p in row) or not _sums_to_one(row):
                    raise PreconditionError(f"CPT row {key} of {v.name} is not a distribution")
        if labels is not None:
            labels.validate(graph)
            self._verify_labels()

    def _verify_labels(self):
        for x in self.graph.names:
            cpt = self.cpts[x]
            for key, row in cpt.rows.items():
                for y in _dropped_parents(self.graph, self.labels, x, cpt.parents, key):
                    i = cpt.parents.index(y)
                    for val in range(self.graph.domain(y)):
                        other = key[:i] + (val,) + key[i + 1 :]
                        if cpt.rows[other] != row:
                            raise LabelError(
                                f"CPT of {x} depends on {y} in a context where the edge is labeled"
                            )

    def cpt_value(self, v: str, value: int, assignment: Mapping[str, int]):
        cpt = self.cpts[v]
        return cpt(tuple(assignment[p] for p in cpt.parents))[value]


def _sums_to_one(row) -> bool:
    total = sum(row)
    if isinstance(total, float):
        return abs(total - 1.0) <= 1e-9
    return total == 1


def _dropped_parents(g: CausalGraph, labels: LabelSet, x: str, parents, key) -> set[str]:
    """Parents of ``x`` its mechanism must ignore on CPT row ``key``."""
    out = set()
    if labels is None:
        return out
    row = dict(zip(parents, key))
    cx = [i for i, c in enumerate(labels.controls) if c in row]
    for ctx, edges in labels.items():
        if all(ctx[i] == row[labels.controls[i]] for i in cx):
            out.update(p for p, c in edges if c == x)
    return out


# -- enumeration ---------------------------------------------------------------


def joint(m: DiscreteModel, over: Iterable[str] | None = None) -> JointTable:
    """Marginal of the model's joint distribution over ``over`` (default:
    observed vertices in declaration order)."""
    g = m.graph
    over = g.observed if over is None else tuple(over)
    g._check(over)
    topo = g.topological_order()
    if math.prod(g.domain(v) for v in topo) > MAX_CELLS:
        raise SizingError("full enumeration exceeds the cell cap")
    pos = {v: i for i, v in enumerate(topo)}
    partial: dict[tuple, object] = {(): Fraction(1)}
    for k, v in enumerate(topo):
        cpt = m.cpts[v]
        ppos = [pos[p] for p in cpt.parents]
        nxt = {}
        for key, p in partial.items():
            row = cpt.rows[tuple(key[i] for i in ppos)]
            for val, q in enumerate(row):
                nxt[key + (val,)] = p * q
        partial = nxt
    opos = [pos[v] for v in over]
    out = {k: Fraction(0) for k in itertools.product(*(range(g.domain(v)) for v in over))}
    for key, p in partial.items():
        sub = tuple(key[i] for i in opos)
        out[sub] += p
    return JointTable(over, tuple(g.domain(v) for v in over), out)


def intervene(m: DiscreteModel, assignment: Mapping[str, int]) -> DiscreteModel:
    """Truncated factorization: replace mechanisms of assigned variables by
    point masses and cut their incoming edges."""
    if not assignment:
        return m
    g = m.graph
    g._check(assignment)
    for v, val in assignment.items():
        if not 0 <= val < g.domain(v):
            raise PreconditionError(f"value {val} outside domain of {v}")
    g2 = g.mutilate(cut_in=assignment)
    cpts = dict(m.cpts)
    for v, val in assignment.items():
        row = tuple(Fraction(int(i == val)) for i in range(g.domain(v)))
        cpts[v] = Cpt((), {(): row})
    return DiscreteModel(g2, cpts)


def interventional(m: DiscreteModel, treatment: Mapping[str, int], outcome: Iterable[str]) -> JointTable:
    """P_t(outcome) computed from the model itself; the ground-truth oracle."""
    return joint(intervene(m, treatment), outcome)


# -- independence ------------------------------------------------------------------


def csi_holds(j: JointTable, x, y, context: Mapping[str, int] | None = None, cond: Iterable[str] = (), tol=None) -> bool:
    """X independent of Y given cond, within the event ``context``.

    Cells whose conditioning event has zero mass are skipped. Exact
    arithmetic is used for rational tables; float tables compare the
    conditional factorization with absolute tolerance ``tol``.
    """
    xs = (x,) if isinstance(x, str) else tuple(x)
    ys = (y,) if isinstance(y, str) else tuple(y)
    context = dict(context or {})
    cond = tuple(c for c in cond)
    clash = (set(xs) | set(ys)) & (set(cond) | set(context))
    if clash or set(xs) & set(ys):
        raise PreconditionError(f"x, y must be disjoint from each other and the conditioning set: {sorted(clash)}")
    exact = j.is_exact() and tol is None
    if tol is None:
        tol = DEFAULT_TOL
    ctx_vars = tuple(context)
    full = j.marginal(xs + ys + ctx_vars + cond)
    mx = j.marginal(xs + ctx_vars + cond)
    my = j.marginal(ys + ctx_vars + cond)
    mz = j.marginal(ctx_vars + cond)
    ctx_vals = tuple(context[c] for c in ctx_vars)
    dom = lambda vs: itertools.product(*(range(j.domain(v)) for v in vs))
    for s in dom(cond):
        z = ctx_vals + s
        pz = mz[z]
        if pz == 0:
            continue
        for xv in dom(xs):
            px = mx[xv + z]
            for yv in dom(ys):
                lhs = full[xv + yv + z] * pz
                rhs = px * my[yv + z]
                if exact:
                    if lhs != rhs:
                        return False
                elif abs(lhs - rhs) > tol * pz * pz:
                    return False
    return True


# -- estimand evaluation -----------------------------------------------------------


def evaluate(e: Estimand, j: JointTable, treatment_values: Mapping[str, int] = None, outcome_values: Mapping[str, int] = None):
    """Value of estimand ``e`` on observational table ``j`` at the given
    treatment and outcome values."""
    return Evaluator(e, j)({**(treatment_values or {}), **(outcome_values or {})})


class Evaluator:
    """Memoizing evaluator; reuse one instance for many assignments."""

    def __init__(self, e: Estimand, j: JointTable):
        if isinstance(e, NonIdentifiable):
            raise PreconditionError(f"cannot evaluate a non-identifiable result: {e.witness}")
        known = set(j.variables)
        missing = estimand_variables(e) - known
        if missing:
            raise UnknownVariableError(f"estimand references unknown variables {sorted(missing)}")
        self.e = e
        self.j = j
        self.memo: dict = {}
        self.one = Fraction(1) if j.is_exact() else 1.0
        self.zero = self.one - self.one

    def __call__(self, env: Mapping[str, int]):
        unbound = self.e.free - set(env)
        if unbound:
            raise PreconditionError(f"no value supplied for free variables {sorted(unbound)}")
        for v, val in env.items():
            if v in self.j.variables and not 0 <= val < self.j.domain(v):
                raise PreconditionError(f"value {val} outside domain of {v}")
        return self._eval(self.e, dict(env))

    def _eval(self, n: Estimand, env: dict):
        key = (id(n),) + tuple(env[v] for v in n.free_sorted)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(n, ObsProb):
            val = self._prob(n, env)
        elif isinstance(n, SumOver):
            val = self.zero
            inner = dict(env)
            for combo in itertools.product(*(range(self.j.domain(v)) for v in n.vars)):
                inner.update(zip(n.vars, combo))
                val = val + self._eval(n.child, inner)
        elif isinstance(n, Product):
            val = self.one
            for f in n.factors:
                val = val * self._eval(f, env)
                if val == 0:
                    break
        elif isinstance(n, Quotient):
            den = self._eval(n.den, env)
            if den == 0:
                raise EvaluationError(f"zero denominator in {render(n.den)}")
            val = self._eval(n.num, env) / den
        elif isinstance(n, ContextMixture):
            val = self.zero
            for ctx, branch in n.branches:
                weight = self.j.prob(dict(ctx)) if ctx else self.one
                if weight == 0:
                    raise EvaluationError(
                        "context " + ", ".join(f"{k}={v}" for k, v in ctx) + " has zero probability"
                    )
                val = val + weight * self._eval(branch, env)
        else:
            raise TypeError(type(n).__name__)
        self.memo[key] = val
        return val

    def _prob(self, n: ObsProb, env):
        fixed = dict(n.ctx)
        for v in n.vars + n.given:
            if v in fixed:
                if fixed[v] != env[v]:
                    return self.zero
            else:
                fixed[v] = env[v]
        den_assign = {v: fixed[v] for v in n.given}
        den_assign.update(n.ctx)
        num = self.j.prob(fixed)
        den = self.j.prob(den_assign) if den_assign else self.one
        if den == 0:
            raise EvaluationError(f"zero-mass conditioning event in {render(n)}")
        return num / den


# -- model construction ------------------------------------------------------------


def random_row(rng, k: int) -> tuple[Fraction, ...]:
    """Strictly positive rational distribution from integers in 1..100."""
    w = [int(x) for x in rng.integers(1, 101, size=k)]
    total = sum(w)
    return tuple(Fraction(x, total) for x in w)


def random_model(g: CausalGraph, rng, labels: LabelSet | None = None) -> DiscreteModel:
    """Strictly positive model compatible with ``labels``.

    Rows are drawn independently, then each row whose context drops some
    parents is overwritten by the row with those parents set to 0.
    """
    cpts = {}
    for v in g.names:
        parents = g.parents(v)
        keys = list(itertools.product(*(range(g.domain(p)) for p in parents)))
        rows = {k: random_row(rng, g.domain(v)) for k in keys}
        if labels is not None:
            fixed = {}
            for k in keys:
                dropped = _dropped_parents(g, labels, v, parents, k)
                base = tuple(0 if p in dropped else val for p, val in zip(parents, k))
                fixed[k] = rows[base]
            rows = fixed
        cpts[v] = Cpt(parents, rows)
    return DiscreteModel(g, cpts, labels)


def compile_sem(
    g: CausalGraph,
    mechanisms: Mapping[str, Callable[[Mapping[str, int], int], int]],
    noise: Mapping[str, Mapping[int, Fraction]],
    labels: LabelSet | None = None,
) -> DiscreteModel:
    """CPTs of a structural equation model with independent discrete noise.

    ``mechanisms[v](parent_values, noise_value)`` returns the value of ``v``;
    ``noise[v]`` maps noise values to probabilities.
    """
    cpts = {}
    for v in g.names:
        parents = g.parents(v)
        rows = {}
        for key in itertools.product(*(range(g.domain(p)) for p in parents)):
            pv = dict(zip(parents, key))
            row = [Fraction(0)] * g.domain(v)
            for e, pe in noise[v].items():
                out = mechanisms[v](pv, e)
                if not 0 <= out < g.domain(v):
                    raise PreconditionError(f"mechanism of {v} produced {out}, outside its domain")
                row[out] += Fraction(pe)
            rows[key] = tuple(row)
        cpts[v] = Cpt(parents, rows)
    return DiscreteModel(g, cpts, labels)


# -- file formats --------------------------------------------------------------------


def _frac(tok: str, lineno) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad probability {tok!r}", lineno) from None


def parse_model(text: str) -> DiscreteModel:
    """Model format: optional ``var`` lines (as in graph files), then blocks
    ``cpt <name> | <parents...>`` followed by ``<parent values...> : <p0> <p1> ...``."""
    declared: dict[str, Variable] = {}
    blocks: dict[str, tuple[tuple[str, ...], dict, int]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "var":
            if len(toks) not in (3, 4) or toks[2] not in ("observed", "latent"):
                raise ParseError("expected 'var <name> observed|latent [domain=<k>]'", lineno)
            domain = 2
            if len(toks) == 4:
                m = re.fullmatch(r"domain=(\d+)", toks[3])
                if not m:
                    raise ParseError(f"bad domain spec {toks[3]!r}", lineno)
                domain = int(m.group(1))
            if toks[1] in declared:
                raise ParseError(f"duplicate variable {toks[1]}", lineno)
            declared[toks[1]] = Variable(toks[1], toks[2] == "observed", domain)
        elif toks[0] == "cpt":
            if len(toks) < 3 or toks[2] != "|":
                raise ParseError("expected 'cpt <name> | <parents...>'", lineno)
            name = toks[1]
            if name in blocks:
                raise ParseError(f"duplicate cpt for {name}", lineno)
            blocks[name] = (tuple(toks[3:]), {}, lineno)
            current = name
        elif ":" in line:
            if current is None:
                raise ParseError("row outside a cpt block", lineno)
            lhs, rhs = line.split(":", 1)
            try:
                key = tuple(int(t) for t in lhs.split())
            except ValueError:
                raise ParseError("parent values must be integers", lineno) from None
            parents, rows, _ = blocks[current]
            if len(key) != len(parents):
                raise ParseError(f"expected {len(parents)} parent values", lineno)
            if key in rows:
                raise ParseError(f"duplicate row {key}", lineno)
            rows[key] = tuple(_frac(t, lineno) for t in rhs.split())
            if not rows[key]:
                raise ParseError("empty probability row", lineno)
        else:
            raise ParseError(f"unknown directive {toks[0]!r}", lineno)

    variables = []
    names = list(declared) + [n for n in blocks if n not in declared]
    for n in names:
        if n not in blocks:
            raise ParseError(f"no cpt for variable {n}")
        if n in declared:
            variables.append(declared[n])
        else:
            rows = blocks[n][1]
            width = len(next(iter(rows.values()))) if rows else 2
            variables.append(Variable(n, True, width))
    edges = []
    for n in names:
        parents, _, lineno = blocks[n]
        for p in parents:
            if p not in blocks:
                raise ParseError(f"unknown parent {p}", lineno)
            edges.append((p, n))
    try:
        g = CausalGraph(variables, edges)
    except GraphError as exc:
        raise ParseError(str(exc)) from None
    cpts = {n: Cpt(blocks[n][0], blocks[n][1]) for n in names}
    try:
        return DiscreteModel(g, cpts)
    except PreconditionError as exc:
        raise ParseError(str(exc)) from None


def format_model(m: DiscreteModel) -> str:
    g = m.graph
    lines = []
    for v in g.variables:
        kind = "observed" if v.observed else "latent"
        lines.append(f"var {v.name} {kind}" + (f" domain={v.domain}" if v.domain != 2 else ""))
    for v in g.names:
        cpt = m.cpts[v]
        lines.append(f"cpt {v} | {' '.join(cpt.parents)}".rstrip())
        for key in sorted(cpt.rows):
            probs = " ".join(str(p) for p in cpt.rows[key])
            lines.append(f"{' '.join(map(str, key))} : {probs}".lstrip())
    return "\n".join(lines) + "\n"


_CELL = re.compile(r"^([A-Za-z0-9_]+)=(\S+)$")


def parse_joint(text: str) -> JointTable:
    """Joint format: lines ``<name>=<v> ... p=<num>/<den>``; omitted cells
    have probability zero."""
    variables = None
    cells = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        assign, p = [], None
        for tok in line.split():
            m = _CELL.match(tok)
            if not m:
                raise ParseError(f"bad cell {tok!r}", lineno)
            k, v = m.groups()
            if k == "p":
                p = _frac(v, lineno)
            else:
                try:
                    assign.append((k, int(v)))
                except ValueError:
                    raise ParseError(f"non-integer value {v!r}", lineno) from None
        if p is None:
            raise ParseError("missing p=", lineno)
        names = tuple(k for k, _ in assign)
        if variables is None:
            variables = names
        elif names != variables:
            raise ParseError("every line must list the same variables in the same order", lineno)
        key = tuple(v for _, v in assign)
        if any(v < 0 for v in key):
            raise ParseError("negative value", lineno)
        if key in cells:
            raise ParseError(f"duplicate cell {key}", lineno)
        cells[key] = p
    if variables is None:
        raise ParseError("empty joint table")
    domains = tuple(max(max(k[i] for k in cells) + 1, 2) for i in range(len(variables)))
    table = {k: Fraction(0) for k in itertools.product(*(range(d) for d in domains))}
    table.update(cells)
    total = sum(table.values())
    if total != 1:
        raise ParseError(f"probabilities sum to {total}, not 1")
    return JointTable(variables, domains, table)


def format_joint(j: JointTable) -> str:
    lines = []
    for key in sorted(j.table):
        cells = " ".join(f"{v}={x}" for v, x in zip(j.variables, key))
        lines.append(f"{cells} p={j.table[key]}")
    return "\n".join(lines) + "\n"


def load_distribution(text: str) -> JointTable:
    """Joint table over observed variables from either file format."""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.split()[0] in ("var", "cpt"):
            return joint(parse_model(text))
        return parse_joint(text)
    raise ParseError("empty distribution file")


def check_positive(j: JointTable, allow_degenerate: bool = False) -> None:
    if j.is_strictly_positive():
        return
    if not allow_degenerate:
        raise PreconditionError("joint distribution is not strictly positive")
    warnings.warn("joint distribution is not strictly positive; results may miss or misreport labels", stacklevel=2)
