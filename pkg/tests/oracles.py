"""Independent reference implementations used only by the test suite.

Nothing here calls the library routine it is meant to check.
"""

import itertools
from fractions import Fraction

import numpy as np

from csiid.distributions import Cpt, DiscreteModel, Evaluator, interventional, joint
from csiid.graph import CausalGraph, Variable
from csiid.labels import ControlSpec, LabelSet


def _adjacency(g):
    parents = {v: set() for v in g.names}
    children = {v: set() for v in g.names}
    for p, c in g.edges:
        parents[c].add(p)
        children[p].add(c)
    return parents, children


def _closure(start, step):
    seen = set(start)
    frontier = list(start)
    while frontier:
        v = frontier.pop()
        for w in step[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return seen


def simple_paths(g, x, y):
    """All simple paths between x and y in the skeleton, as vertex lists."""
    parents, children = _adjacency(g)
    nbrs = {v: parents[v] | children[v] for v in g.names}
    out = []

    def walk(path):
        v = path[-1]
        if v == y:
            out.append(list(path))
            return
        for w in sorted(nbrs[v]):
            if w not in path:
                path.append(w)
                walk(path)
                path.pop()

    walk([x])
    return out


def _is_collider(g, a, v, b):
    return g.has_edge(a, v) and g.has_edge(b, v)


def dsep_by_paths(g, xs, ys, zs):
    """Exhaustive path enumeration; exponential, small graphs only."""
    _, children = _adjacency(g)
    zs = set(zs)
    for x in xs:
        for y in ys:
            for path in simple_paths(g, x, y):
                blocked = False
                for a, v, b in zip(path, path[1:], path[2:]):
                    if _is_collider(g, a, v, b):
                        if not (_closure([v], children) & zs):
                            blocked = True
                    elif v in zs:
                        blocked = True
                    if blocked:
                        break
                if not blocked:
                    return False
    return True


def inducing_path_by_paths(g, x, y):
    parents, _ = _adjacency(g)
    anc = _closure([x, y], parents)
    for path in simple_paths(g, x, y):
        ok = True
        for a, v, b in zip(path, path[1:], path[2:]):
            col = _is_collider(g, a, v, b)
            if g.is_observed(v) and not col:
                ok = False
            if col and v not in anc:
                ok = False
            if not ok:
                break
        if ok:
            return True
    return False


def csi_rowwise(j, x, y, context, cond):
    """CSI by comparing conditional rows P(x | y, ctx, s) across y values."""
    names = list(j.variables)
    ix, iy = names.index(x), names.index(y)
    ic = [names.index(c) for c in cond]
    groups = {}
    for key, p in j.table.items():
        if any(key[names.index(k)] != v for k, v in context.items()):
            continue
        s = tuple(key[i] for i in ic)
        groups.setdefault(s, {}).setdefault(key[iy], {}).setdefault(key[ix], Fraction(0))
        groups[s][key[iy]][key[ix]] += p
    for s, by_y in groups.items():
        rows = []
        for yv, xs in by_y.items():
            total = sum(xs.values())
            if total == 0:
                continue
            rows.append({xv: q / total for xv, q in xs.items()})
        if any(r != rows[0] for r in rows[1:]):
            return False
    return True


def random_dag(rng, n_obs, n_lat, p, domains=None):
    names = [f"V{i}" for i in range(n_obs)] + [f"U{i}" for i in range(n_lat)]
    order = list(rng.permutation(len(names)))
    rank = {names[k]: i for i, k in enumerate(order)}
    edges = []
    for a, b in itertools.combinations(names, 2):
        if rng.random() < p:
            edges.append((a, b) if rank[a] < rank[b] else (b, a))
    domains = domains or {}
    return CausalGraph([Variable(n, n.startswith("V"), domains.get(n, 2)) for n in names], edges)


def random_confounded_dag(rng, n_obs, n_lat, p, domains=None):
    """Random DAG over observed V0.. plus latents U0.. that each confound two
    or three observed vertices; a latent sometimes has an observed parent
    that precedes all of its children."""
    obs = random_dag(rng, n_obs, 0, p, domains)
    topo = {v: i for i, v in enumerate(obs.topological_order())}
    variables = list(obs.variables)
    edges = list(obs.edges)
    for i in range(n_lat):
        u = f"U{i}"
        variables.append(Variable(u, False))
        k = min(n_obs, int(rng.integers(2, 4)))
        kids = [str(v) for v in rng.choice(obs.names, size=k, replace=False)]
        edges += [(u, v) for v in kids]
        first = min(topo[v] for v in kids)
        earlier = [v for v in obs.names if topo[v] < first]
        if earlier and rng.random() < 0.25:
            edges.append((str(rng.choice(earlier)), u))
    return CausalGraph(variables, edges)


def random_labeled_instance(rng, max_obs=7, max_lat=3, p_edge=0.45, p_label=0.35, max_controls=2):
    """Random (graph, controls, labels, treatment, outcome) with at least two
    non-control observed variables, or None."""
    n_obs = int(rng.integers(3, max_obs + 1))
    n_lat = int(rng.integers(0, max_lat + 1))
    domains = {}
    if rng.random() < 0.15:
        domains[f"V{int(rng.integers(n_obs))}"] = 3
    g = random_confounded_dag(rng, n_obs, n_lat, p_edge, domains)
    roots = [r for r in g.observed_roots() if g.children(r)]
    controls = tuple(r for r in roots if rng.random() < 0.7)[:max_controls]
    c = ControlSpec(controls)
    cand = [e for e in g.edges if e[0] not in controls and e[1] not in controls]
    labels = {ctx: [e for e in cand if rng.random() < p_label] for ctx in c.contexts(g)}
    l = LabelSet.build(g, c, labels)
    rest = [v for v in g.observed if v not in controls]
    if len(rest) < 2:
        return None
    k = int(rng.integers(1, min(3, len(rest) - 1) + 1))
    t = set(rng.choice(rest, size=k, replace=False).tolist())
    s_pool = [v for v in rest if v not in t]
    s = set(rng.choice(s_pool, size=int(rng.integers(1, len(s_pool) + 1)), replace=False).tolist())
    return g, c, l, t, s


def confounded_twin(m1, x, y, u, controls=()):
    """A second model on the same graph as ``m1`` with the same observational
    joint over {controls, x, y}, in which y ignores x.

    The latent ``u`` is replaced by one that draws, for every control
    context, an (x, y) pair from P1(x, y | context); x and y copy the pair
    selected by the actual context. Requires that x, y have no parents other
    than u, the controls, and (for y) x.
    """
    g1 = m1.graph
    controls = tuple(controls)
    ctxs = list(itertools.product(*(range(g1.domain(c)) for c in controls)))
    pxy = joint(m1, controls + (x, y))
    dx, dy = g1.domain(x), g1.domain(y)
    pairs = list(itertools.product(range(dx), range(dy)))
    u_states = list(itertools.product(range(len(pairs)), repeat=len(ctxs)))
    variables = [Variable(v.name, v.observed, len(u_states) if v.name == u else v.domain) for v in g1.variables]
    g2 = CausalGraph(variables, g1.edges)

    def cond(ctx, pair):
        num = pxy.table[ctx + pair]
        den = sum(pxy.table[ctx + q] for q in pairs)
        return num / den

    cpts = dict(m1.cpts)
    cpts[u] = Cpt((), {(): tuple(
        np.prod([cond(ctx, pairs[k]) for ctx, k in zip(ctxs, state)], dtype=object) for state in u_states
    )})
    for var, coord in ((x, 0), (y, 1)):
        parents = g2.parents(var)
        rows = {}
        for key in itertools.product(*(range(g2.domain(p)) for p in parents)):
            pv = dict(zip(parents, key))
            ctx = tuple(pv[c] for c in controls)
            chosen = pairs[u_states[pv[u]][ctxs.index(ctx)]][coord]
            rows[key] = tuple(Fraction(int(v == chosen)) for v in range(g2.domain(var)))
        cpts[var] = Cpt(parents, rows)
    return DiscreteModel(g2, cpts)


def assert_matches_oracle(g, e, t, s, m):
    """Compare estimand ``e`` with the truncated-factorization oracle for
    every treatment and outcome assignment."""
    ev = Evaluator(e, joint(m))
    t, s = sorted(t), sorted(s)
    for tv in itertools.product(*(range(g.domain(v)) for v in t)):
        truth = interventional(m, dict(zip(t, tv)), s)
        for sv in itertools.product(*(range(g.domain(v)) for v in s)):
            got = ev({**dict(zip(t, tv)), **dict(zip(s, sv))})
            assert got == truth.table[sv], (t, tv, s, sv, got, truth.table[sv])
