import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csiid import catalog
from csiid.distributions import Cpt, DiscreteModel, csi_holds, joint, random_model
from csiid.errors import LabelError, ParseError, PreconditionError
from csiid.graph import make_graph
from csiid.labels import (
    ControlSpec,
    LabelSet,
    format_labels,
    is_maximal_regular,
    is_regular,
    maximalize,
    normalize,
    parse_labels,
    regularize,
)
from oracles import random_labeled_instance


def test_irregular_label_is_removed_everywhere():
    g, c, l = catalog.gated_mediator_irregular()
    assert not is_regular(g, l)
    g2, l2 = regularize(g, l, c)
    assert not g2.has_edge("X", "Z")
    assert ("X", "Z") not in l2.all_edges()
    assert l2[(0,)] == {("Z", "W")} and l2[(1,)] == {("W", "Y")}
    assert is_maximal_regular(g2, maximalize(g2, l2, c), c)


def test_maximalize_copies_across_unrelated_controls():
    g = make_graph("C1 C2 Y X", "", "C1->X C2->Y Y->X")
    c = ControlSpec(("C1", "C2"))
    l = LabelSet.build(g, c, {(0, 0): {("Y", "X")}})
    m = maximalize(g, l, c)
    assert m[(0, 0)] == m[(0, 1)] == {("Y", "X")}
    assert not m[(1, 0)] and not m[(1, 1)]
    assert is_maximal_regular(g, m, c)
    assert not is_maximal_regular(g, l, c)


def test_maximalize_requires_regular():
    g, c, l = catalog.gated_mediator_irregular()
    with pytest.raises(PreconditionError):
        maximalize(g, l, c)


def test_every_context_is_materialized():
    g, c, l = catalog.switched_bow_labeled()
    assert l.contexts() == [(0,), (1,)]
    empty = LabelSet.empty(g, c)
    assert empty.is_empty() and empty.contexts() == [(0,), (1,)]
    assert l[{"C": 1}] == {("X", "Y")}


def test_build_validation():
    g = catalog.switched_bow()
    c = ControlSpec(("C",))
    with pytest.raises(LabelError, match="not in the graph"):
        LabelSet.build(g, c, {(0,): {("Y", "X")}})
    with pytest.raises(LabelError, match="control"):
        LabelSet.build(g, c, {(0,): {("C", "X")}})
    with pytest.raises(LabelError, match="complete"):
        LabelSet.build(g, c, {(2,): set()})
    with pytest.raises(LabelError, match="observed root"):
        ControlSpec(("X",)).validate(g)
    with pytest.raises(LabelError):
        ControlSpec(("C", "C"))


@pytest.mark.parametrize(
    "text, line",
    [
        ("control C\nlabel C=0 remove Y->X\n", 2),
        ("control C\nlabel C=0 remove C->X\n", 2),
        ("control C\nlabel C=2 remove X->Y\n", 2),
        ("control C\nlabel D=0 remove X->Y\n", 2),
        ("label C=0 remove X->Y\n", 1),
        ("control C\nlabel C=0 remove X->Y\ncontrol X\n", 3),
        ("control Q\n", 1),
        ("control C\nlabel C=0 drop X->Y\n", 2),
    ],
)
def test_parse_rejections(text, line):
    with pytest.raises(ParseError) as info:
        parse_labels(text, catalog.switched_bow())
    assert info.value.line == line


def test_parse_rejects_partial_context():
    g = make_graph("C1 C2 Y X", "", "C1->X C2->X Y->X")
    with pytest.raises(ParseError, match="partial context") as info:
        parse_labels("control C1\ncontrol C2\nlabel C1=0 remove Y->X\n", g)
    assert info.value.line == 3


def test_parse_rejects_non_root_control():
    with pytest.raises(ParseError, match="observed root"):
        parse_labels("control X\n", catalog.switched_bow())


def test_format_parse_roundtrip():
    for g, c, l in (catalog.switched_bow_labeled(), catalog.split_confounder_labeled(), catalog.gated_mediator_labeled()):
        c2, l2 = parse_labels(format_labels(g, l), g)
        assert c2 == c and l2 == l


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalize_idempotent(seed):
    inst = random_labeled_instance(np.random.default_rng(seed))
    if inst is None:
        return
    g, c, l, _, _ = inst
    g1, l1 = normalize(g, l, c)
    assert is_maximal_regular(g1, l1, c)
    g2, l2 = normalize(g1, l1, c)
    assert g2 == g1 and l2 == l1
    # labels only grow under maximalization, edges only shrink
    assert set(g1.edges) <= set(g.edges)
    for ctx in l.contexts():
        assert l[ctx] - l1[ctx] <= set(g.edges) - set(g1.edges)


def test_regularization_preserves_distribution():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 40:
        inst = random_labeled_instance(rng, max_obs=5, max_lat=2)
        if inst is None:
            continue
        g, c, l, _, _ = inst
        g1, l1 = regularize(g, l, c)
        removed = set(g.edges) - set(g1.edges)
        if not removed:
            continue
        m = random_model(g, rng, l)
        full = joint(m, g.names)
        for y, x in removed:
            rest = [p for p in g.parents(x) if p != y]
            assert csi_holds(full, x, y, {}, rest)
        # the model's CPTs on the reduced graph give the same joint
        cpts = {}
        for v in g1.names:
            old = m.cpts[v]
            keep = [i for i, p in enumerate(old.parents) if p in g1.parents(v)]
            rows = {}
            for key, row in old.rows.items():
                rows.setdefault(tuple(key[i] for i in keep), row)
            cpts[v] = Cpt(tuple(old.parents[i] for i in keep), rows)
        assert joint(DiscreteModel(g1, cpts, l1), g.names).table == full.table
        checked += 1
