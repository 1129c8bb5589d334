"""Symbolic estimands: expression trees over observational probabilities.

Node kinds
----------
``ObsProb``         P(vars | given, ctx) where ``ctx`` holds fixed assignments
``SumOver``         sum of ``child`` over every value of ``vars``
``Product``         product of factors; the empty product is 1
``Quotient``        numerator / denominator
``ContextMixture``  sum over contexts of P(ctx) times the branch estimand
``NonIdentifiable`` failure carrying a free-text witness (root only)

S-expression grammar::

    expr    := (p (V...) given (V...) [ctx ((V k)...)])
             | (sum (V...) expr) | (prod expr...) | (div expr expr)
             | (ctxmix ((V k)... expr)...) | (nonid "witness")

The smart constructors :func:`product`, :func:`summation` and
:func:`quotient` apply only structural identities: flattening, the chain
rule P(A|B)P(C|A,B) = P(A,C|B), and summing a variable out of the single
factor that mentions it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import ParseError

Assignment = tuple[tuple[str, int], ...]


@dataclass(frozen=True, eq=True)
class Estimand:
    @cached_property
    def free(self) -> frozenset[str]:
        raise NotImplementedError

    @cached_property
    def free_sorted(self) -> tuple[str, ...]:
        return tuple(sorted(self.free))


@dataclass(frozen=True, eq=True)
class ObsProb(Estimand):
    vars: tuple[str, ...]
    given: tuple[str, ...] = ()
    ctx: Assignment = ()

    @cached_property
    def free(self):
        return frozenset(self.vars) | frozenset(self.given)


@dataclass(frozen=True, eq=True)
class SumOver(Estimand):
    vars: tuple[str, ...]
    child: Estimand

    @cached_property
    def free(self):
        return self.child.free - frozenset(self.vars)


@dataclass(frozen=True, eq=True)
class Product(Estimand):
    factors: tuple[Estimand, ...] = ()

    @cached_property
    def free(self):
        return frozenset().union(*(f.free for f in self.factors))


@dataclass(frozen=True, eq=True)
class Quotient(Estimand):
    num: Estimand
    den: Estimand

    @cached_property
    def free(self):
        return self.num.free | self.den.free


@dataclass(frozen=True, eq=True)
class ContextMixture(Estimand):
    branches: tuple[tuple[Assignment, Estimand], ...]

    @cached_property
    def free(self):
        return frozenset().union(*(b.free for _, b in self.branches))


@dataclass(frozen=True, eq=True)
class NonIdentifiable(Estimand):
    witness: str

    @cached_property
    def free(self):
        return frozenset()


ONE = Product(())


def is_identified(e: Estimand) -> bool:
    return not isinstance(e, NonIdentifiable)


def variables(e: Estimand) -> frozenset[str]:
    """Every variable mentioned anywhere, bound, free or fixed."""
    out: set[str] = set()
    stack, seen = [e], set()
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, ObsProb):
            out.update(n.vars, n.given, (k for k, _ in n.ctx))
        elif isinstance(n, SumOver):
            out.update(n.vars)
            stack.append(n.child)
        elif isinstance(n, Product):
            stack.extend(n.factors)
        elif isinstance(n, Quotient):
            stack += [n.num, n.den]
        elif isinstance(n, ContextMixture):
            for ctx, b in n.branches:
                out.update(k for k, _ in ctx)
                stack.append(b)
    return frozenset(out)


# -- smart constructors -----------------------------------------------------------


class Ordering:
    """Canonical variable order used when constructors build new terms."""

    def __init__(self, names: Sequence[str]):
        self._pos = {n: i for i, n in enumerate(names)}

    def __call__(self, names: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(set(names), key=lambda n: (self._pos.get(n, len(self._pos)), n)))


_DEFAULT = Ordering(())


def prob(vars, given=(), ctx=(), order: Ordering = _DEFAULT) -> Estimand:
    vars = order(vars)
    if not vars:
        return ONE
    return ObsProb(vars, order(set(given) - set(vars)), tuple(ctx))


def product(factors: Iterable[Estimand], order: Ordering = _DEFAULT) -> Estimand:
    flat: list[Estimand] = []
    for f in factors:
        if isinstance(f, Product):
            flat.extend(f.factors)
        else:
            flat.append(f)
    flat = _chain_merge(flat, order)
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def _chain_merge(factors: list[Estimand], order: Ordering) -> list[Estimand]:
    # P(A|B) * P(C|A,B) -> P(A,C|B), repeated to a fixpoint
    changed = True
    while changed:
        changed = False
        probs = [(i, f) for i, f in enumerate(factors) if isinstance(f, ObsProb)]
        for i, a in probs:
            head_a, given_a = set(a.vars), set(a.given)
            for j, b in probs:
                if i == j or a.ctx != b.ctx:
                    continue
                if set(b.given) == head_a | given_a:
                    merged = ObsProb(order(head_a | set(b.vars)), a.given, a.ctx)
                    factors = [f for k, f in enumerate(factors) if k not in (i, j)]
                    factors.insert(min(i, j), merged)
                    changed = True
                    break
            if changed:
                break
    return factors


def summation(vars: Iterable[str], child: Estimand, order: Ordering = _DEFAULT) -> Estimand:
    pending = list(order(vars))
    if isinstance(child, SumOver):
        pending = list(order(set(pending) | set(child.vars)))
        child = child.child
    kept = []
    for v in pending:
        reduced = _sum_out(v, child, order)
        if reduced is None:
            kept.append(v)
        else:
            child = reduced
    if not kept:
        return child
    return SumOver(tuple(kept), child)


def _sum_out(v: str, e: Estimand, order: Ordering):
    """Marginalize ``v`` when exactly one factor mentions it, as a head
    variable. Returns None when no structural rule applies."""
    if isinstance(e, ObsProb):
        if v in e.vars and v not in e.given:
            return prob(set(e.vars) - {v}, e.given, e.ctx, order)
        return None
    if isinstance(e, Product):
        hits = [i for i, f in enumerate(e.factors) if v in f.free]
        if len(hits) != 1:
            return None
        f = e.factors[hits[0]]
        reduced = _sum_out(v, f, order)
        if reduced is None:
            return None
        rest = list(e.factors)
        rest[hits[0]] = reduced
        return product(rest, order)
    return None


def quotient(num: Estimand, den: Estimand, order: Ordering = _DEFAULT) -> Estimand:
    if den == ONE:
        return num
    if num == den:
        return ONE
    if (
        isinstance(num, ObsProb)
        and isinstance(den, ObsProb)
        and num.given == den.given
        and num.ctx == den.ctx
        and set(den.vars) < set(num.vars)
    ):
        # P(A,B|G) / P(A|G) -> P(B|A,G)
        return prob(set(num.vars) - set(den.vars), set(num.given) | set(den.vars), num.ctx, order)
    return Quotient(num, den)


def mixture(branches: Iterable[tuple[Assignment, Estimand]]) -> Estimand:
    return ContextMixture(tuple((tuple(ctx), b) for ctx, b in branches))


def with_context(e: Estimand, ctx: Assignment) -> Estimand:
    """Append fixed assignments ``ctx`` to the conditioning side of every
    probability term."""
    if not ctx:
        return e
    memo: dict[int, Estimand] = {}

    def go(n):
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, ObsProb):
            out = ObsProb(n.vars, n.given, n.ctx + tuple(ctx))
        elif isinstance(n, SumOver):
            out = SumOver(n.vars, go(n.child))
        elif isinstance(n, Product):
            out = Product(tuple(go(f) for f in n.factors)) if n.factors else n
        elif isinstance(n, Quotient):
            out = Quotient(go(n.num), go(n.den))
        else:
            raise TypeError(f"cannot attach a context to {type(n).__name__}")
        memo[key] = out
        return out

    return go(e)


# -- rendering ----------------------------------------------------------------


def render(e: Estimand, style: str = "sexpr") -> str:
    if style == "sexpr":
        return _sexpr(e)
    if style == "text":
        return _text(e)
    raise ValueError(f"unknown style {style!r}")


def _names(vs) -> str:
    return "(" + " ".join(vs) + ")"


def _assign_sexpr(ctx) -> str:
    return " ".join(f"({k} {v})" for k, v in ctx)


def _sexpr(e: Estimand) -> str:
    if isinstance(e, ObsProb):
        s = f"(p {_names(e.vars)} given {_names(e.given)}"
        if e.ctx:
            s += f" ctx ({_assign_sexpr(e.ctx)})"
        return s + ")"
    if isinstance(e, SumOver):
        if not e.vars:
            return _sexpr(e.child)
        return f"(sum {_names(e.vars)} {_sexpr(e.child)})"
    if isinstance(e, Product):
        return "(prod" + "".join(" " + _sexpr(f) for f in e.factors) + ")"
    if isinstance(e, Quotient):
        return f"(div {_sexpr(e.num)} {_sexpr(e.den)})"
    if isinstance(e, ContextMixture):
        parts = []
        for ctx, b in e.branches:
            head = _assign_sexpr(ctx)
            parts.append(f"({head} {_sexpr(b)})" if head else f"({_sexpr(b)})")
        return "(ctxmix " + " ".join(parts) + ")"
    if isinstance(e, NonIdentifiable):
        witness = e.witness.replace("\\", "\\\\").replace('"', '\\"')
        return f'(nonid "{witness}")'
    raise TypeError(type(e).__name__)


def _text(e: Estimand) -> str:
    if isinstance(e, ObsProb):
        head = ", ".join(e.vars)
        cond = list(e.given) + [f"{k}={v}" for k, v in e.ctx]
        return f"P({head} | {', '.join(cond)})" if cond else f"P({head})"
    if isinstance(e, SumOver):
        if not e.vars:
            return _text(e.child)
        return f"Σ_{{{','.join(e.vars)}}} {_wrap(e.child)}"
    if isinstance(e, Product):
        if not e.factors:
            return "1"
        return " ".join(_wrap(f) for f in e.factors)
    if isinstance(e, Quotient):
        return f"{_wrap(e.num)} / {_wrap(e.den)}"
    if isinstance(e, ContextMixture):
        terms = []
        for ctx, b in e.branches:
            if ctx:
                weight = "P(" + ", ".join(f"{k}={v}" for k, v in ctx) + ")"
                terms.append(f"{weight} {_wrap(b)}")
            else:
                terms.append(_text(b))
        return " + ".join(terms)
    if isinstance(e, NonIdentifiable):
        return f"NON-IDENTIFIABLE: {e.witness}"
    raise TypeError(type(e).__name__)


def _wrap(e: Estimand) -> str:
    s = _text(e)
    return s if isinstance(e, ObsProb) else f"[{s}]"


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(r'\s*(?:(\()|(\))|"((?:[^"\\]|\\.)*)"|([^\s()"]+))')


def _tokenize(text: str):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at offset {pos}")
        pos = m.end()
        if m.group(1):
            out.append("(")
        elif m.group(2):
            out.append(")")
        elif m.group(3) is not None:
            out.append(("str", re.sub(r"\\(.)", r"\1", m.group(3))))
        elif m.group(4):
            out.append(m.group(4))
    return out


def _read(tokens, i):
    tok = tokens[i] if i < len(tokens) else None
    if tok is None:
        raise ParseError("unexpected end of input")
    if tok == "(":
        items, i = [], i + 1
        while True:
            if i >= len(tokens):
                raise ParseError("unbalanced parentheses")
            if tokens[i] == ")":
                return items, i + 1
            item, i = _read(tokens, i)
            items.append(item)
    if tok == ")":
        raise ParseError("unexpected ')'")
    return tok, i + 1


def _symbols(x, what):
    if not isinstance(x, list) or not all(isinstance(s, str) for s in x):
        raise ParseError(f"expected a list of variable names in {what}")
    return tuple(x)


def _assignment(x) -> Assignment:
    out = []
    for pair in x:
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(s, str) for s in pair)):
            raise ParseError(f"bad assignment {pair!r}")
        try:
            out.append((pair[0], int(pair[1])))
        except ValueError:
            raise ParseError(f"non-integer value in assignment {pair!r}") from None
    return tuple(out)


def _build(x) -> Estimand:
    if not isinstance(x, list) or not x or not isinstance(x[0], str):
        raise ParseError(f"expected an expression, got {x!r}")
    head, args = x[0], x[1:]
    if head == "p":
        if len(args) not in (3, 5) or args[1] != "given":
            raise ParseError("expected (p (V...) given (V...) [ctx (...)])")
        ctx = ()
        if len(args) == 5:
            if args[3] != "ctx":
                raise ParseError("expected 'ctx'")
            ctx = _assignment(args[4])
        return ObsProb(_symbols(args[0], "p"), _symbols(args[2], "given"), ctx)
    if head == "sum":
        if len(args) != 2:
            raise ParseError("expected (sum (V...) expr)")
        vs = _symbols(args[0], "sum")
        child = _build(args[1])
        return SumOver(vs, child) if vs else child
    if head == "prod":
        return Product(tuple(_build(a) for a in args))
    if head == "div":
        if len(args) != 2:
            raise ParseError("expected (div expr expr)")
        return Quotient(_build(args[0]), _build(args[1]))
    if head == "ctxmix":
        branches = []
        for b in args:
            if not isinstance(b, list) or not b:
                raise ParseError("bad ctxmix branch")
            branches.append((_assignment(b[:-1]), _build(b[-1])))
        return ContextMixture(tuple(branches))
    if head == "nonid":
        if len(args) != 1 or not isinstance(args[0], tuple):
            raise ParseError('expected (nonid "witness")')
        return NonIdentifiable(args[0][1])
    raise ParseError(f"unknown node kind {head!r}")


def parse_sexpr(text: str) -> Estimand:
    tokens = _tokenize(text)
    tree, i = _read(tokens, 0)
    if i != len(tokens):
        raise ParseError("trailing input after expression")
    return _build(tree)
