"""d-separation, inducing paths and do-calculus preconditions on DAGs."""

from __future__ import annotations

from collections import deque
from typing import Iterable

from .errors import InternalConsistencyError, PreconditionError
from .graph import CausalGraph


def _disjoint(**sets):
    items = list(sets.items())
    for i, (na, a) in enumerate(items):
        for nb, b in items[i + 1 :]:
            common = a & b
            if common:
                raise PreconditionError(f"{na} and {nb} overlap on {sorted(common)}")


def d_separated(g: CausalGraph, xs: Iterable[str], ys: Iterable[str], zs: Iterable[str] = ()) -> bool:
    """True iff every path between ``xs`` and ``ys`` is blocked by ``zs``.

    Reachability over (vertex, direction) states: a ball arriving from a
    child travels "up", from a parent "down". Colliders pass the ball only
    when they are in ``An(zs)``.
    """
    xs, ys, zs = set(xs), set(ys), set(zs)
    if not xs or not ys:
        raise PreconditionError("d_separated needs non-empty xs and ys")
    _disjoint(xs=xs, ys=ys, zs=zs)
    g._check(xs | ys | zs)

    anc_z = g.ancestors(zs)
    queue = deque((x, True) for x in xs)  # True: arrived from a child
    seen = set()
    while queue:
        v, up = queue.popleft()
        if (v, up) in seen:
            continue
        seen.add((v, up))
        if v in ys:
            return False
        if up:
            if v in zs:
                continue
            queue.extend((p, True) for p in g.parents(v))
            queue.extend((c, False) for c in g.children(v))
        else:
            if v not in zs:
                queue.extend((c, False) for c in g.children(v))
            if v in anc_z:
                queue.extend((p, True) for p in g.parents(v))
    return True


def inducing_path_exists(g: CausalGraph, x: str, y: str) -> bool:
    """Search for a path whose observed interior vertices are all colliders
    and whose colliders all lie in ``An({x, y})``.

    States are (vertex, entered-through-arrowhead). A vertex is a collider on
    the walk when it was entered through an arrowhead and is left towards one
    of its parents.
    """
    for v in (x, y):
        if not g.is_observed(v):
            raise PreconditionError(f"inducing paths are defined between observed vertices; {v} is latent")
    if x == y:
        raise PreconditionError("endpoints must differ")
    if g.adjacent(x, y):
        return True

    anc = g.ancestors((x, y))
    queue = deque()
    seen = set()
    for p in g.parents(x):
        queue.append((p, False))
    for c in g.children(x):
        queue.append((c, True))
    while queue:
        v, arrow_in = queue.popleft()
        if v == y:
            return True
        if v == x or (v, arrow_in) in seen:
            continue
        seen.add((v, arrow_in))
        observed = g.is_observed(v)
        # leave towards a parent: collider iff entered through an arrowhead
        collider = arrow_in
        if (not observed or collider) and (not collider or v in anc):
            queue.extend((p, False) for p in g.parents(v))
        # leave towards a child: never a collider, allowed only through latents
        if not observed:
            queue.extend((c, True) for c in g.children(v))
    return False


def verma_equivalence_check(g: CausalGraph, x: str, y: str) -> bool:
    """d-separability of non-adjacent observed ``x`` and ``y`` by observed
    ancestors, cross-checked against :func:`inducing_path_exists`."""
    if g.adjacent(x, y):
        raise PreconditionError(f"{x} and {y} are adjacent")
    for v in (x, y):
        if not g.is_observed(v):
            raise PreconditionError(f"{v} is latent")
    cond = {v for v in g.ancestors((x, y)) if g.is_observed(v)} - {x, y}
    separated = d_separated(g, {x}, {y}, cond)
    if separated == inducing_path_exists(g, x, y):
        raise InternalConsistencyError(
            f"d-separation ({separated}) and inducing-path search disagree for {x}, {y}"
        )
    return separated


def docalc_rule_holds(g: CausalGraph, rule: int, ys, zs, xs=(), ws=()) -> bool:
    """Graphical precondition of do-calculus rule 1, 2 or 3 for
    ``P_x(y | z, w)`` manipulations."""
    ys, zs, xs, ws = set(ys), set(zs), set(xs), set(ws)
    _disjoint(ys=ys, zs=zs, xs=xs, ws=ws)
    if rule not in (1, 2, 3):
        raise PreconditionError(f"rule must be 1, 2 or 3, got {rule}")
    if not zs or not ys:
        return True
    g_x = g.mutilate(cut_in=xs)
    if rule == 1:
        h = g_x
    elif rule == 2:
        h = g_x.mutilate(cut_out=zs)
    else:
        z_w = zs - g_x.ancestors(ws)
        h = g_x.mutilate(cut_in=z_w)
    return d_separated(h, ys, zs, xs | ws)
