from hypothesis import strategies as st

from csiid.graph import CausalGraph, Variable


@st.composite
def dags(draw, min_size=1, max_size=8, latent=True):
    """DAGs whose vertex index order is a topological order."""
    n = draw(st.integers(min_size, max_size))
    observed = [draw(st.booleans()) if latent else True for _ in range(n)]
    names = [f"{'V' if o else 'U'}{i}" for i, o in enumerate(observed)]
    edges = []
    for j in range(n):
        for i in range(j):
            if draw(st.booleans()):
                edges.append((names[i], names[j]))
    perm = draw(st.permutations(range(n)))
    variables = [Variable(names[k], observed[k]) for k in perm]
    return CausalGraph(variables, edges)


@st.composite
def dag_with_sets(draw, max_size=8):
    """A DAG and three disjoint vertex sets, the first two non-empty."""
    g = draw(dags(min_size=2, max_size=max_size))
    names = list(g.names)
    roles = draw(st.lists(st.sampled_from("xyz."), min_size=len(names), max_size=len(names)))
    roles[0], roles[1] = "x", "y"
    perm = draw(st.permutations(names))
    xs = {v for v, r in zip(perm, roles) if r == "x"}
    ys = {v for v, r in zip(perm, roles) if r == "y"}
    zs = {v for v, r in zip(perm, roles) if r == "z"}
    return g, xs, ys, zs
