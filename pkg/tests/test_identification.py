import numpy as np
import pytest

from csiid import catalog
from csiid.distributions import interventional, joint, random_model
from csiid.errors import PreconditionError
from csiid.estimand import NonIdentifiable, is_identified, render
from csiid.graph import make_graph
from csiid.identification import Admg, c_components, identify, latent_project
from oracles import assert_matches_oracle, confounded_twin, random_dag


def test_projection_of_latent_chain():
    g = make_graph("A B X Y", "U1 U2", "A->U1 U1->B U2->X U2->U1")
    a = latent_project(g)
    assert a.directed == {("A", "B")}
    assert a.bidirected == {frozenset(("X", "B"))}
    assert set(c_components(a)) == {frozenset({"X", "B"}), frozenset({"A"}), frozenset({"Y"})}


def test_projection_of_split_confounder():
    a = latent_project(catalog.split_confounder())
    assert frozenset(("X1", "X2")) in a.bidirected
    assert frozenset(("Z1", "Z2")) in a.bidirected
    comps = {frozenset(c) for c in a.c_components()}
    assert frozenset({"X1", "X2", "Z1", "Z2"}) in comps


def test_admg_rejects_directed_cycle():
    with pytest.raises(PreconditionError):
        Admg.from_edges(["A", "B"], [("A", "B"), ("B", "A")])


def test_markov_chain_gives_conditional():
    e = identify(latent_project(catalog.markov_chain()), {"X"}, {"Y"})
    assert render(e) == "(p (Y) given (X))"


def test_backdoor_adjustment_form():
    e = identify(latent_project(catalog.backdoor_chain()), {"X"}, {"Y"})
    assert render(e) == "(sum (Z) (prod (p (Z) given ()) (p (Y) given (Z X))))"


def test_front_door_form():
    e = identify(latent_project(catalog.front_door()), {"X"}, {"Y"})
    assert render(e, "text") == "Σ_{M} [P(M | X) [Σ_{X} [P(X) P(Y | X, M)]]]"


@pytest.mark.parametrize(
    "g, t, s",
    [
        (catalog.bow(), {"X"}, {"Y"}),
        (make_graph("X Z Y", "U1 U2", "X->Z Z->Y U1->X U1->Y U2->Z U2->Y"), {"X"}, {"Y"}),
        (make_graph("X Z Y", "U", "X->Z Z->Y U->X U->Z"), {"X"}, {"Y", "Z"}),
        (make_graph("X Z Y", "U1 U2", "X->Y Z->Y U1->X U1->Z U2->Z U2->Y"), {"X"}, {"Y"}),
    ],
)
def test_known_non_identifiable(g, t, s):
    e = identify(latent_project(g), t, s)
    assert isinstance(e, NonIdentifiable)
    assert "cannot be reduced" in e.witness


def test_napkin_is_identified():
    g = make_graph("W1 W2 X Y", "U1 U2", "W1->W2 W2->X X->Y U1->W1 U1->X U2->W1 U2->Y")
    e = identify(latent_project(g), {"X"}, {"Y"})
    assert is_identified(e)
    rng = np.random.default_rng(5)
    for _ in range(10):
        assert_matches_oracle(g, e, {"X"}, {"Y"}, random_model(g, rng))


def test_front_door_and_backdoor_against_oracle():
    rng = np.random.default_rng(0)
    for g in (catalog.front_door(), catalog.backdoor_chain()):
        e = identify(latent_project(g), {"X"}, {"Y"})
        for _ in range(100):
            assert_matches_oracle(g, e, {"X"}, {"Y"}, random_model(g, rng))


def test_bow_two_model_counterexample():
    rng = np.random.default_rng(1)
    g = catalog.bow()
    m1 = random_model(g, rng)
    m2 = confounded_twin(m1, "X", "Y", "U")
    assert joint(m1).table == joint(m2).table
    assert joint(m1).is_strictly_positive()
    p1 = interventional(m1, {"X": 1}, ["Y"]).table
    p2 = interventional(m2, {"X": 1}, ["Y"]).table
    assert p1 != p2


def test_input_checks():
    a = latent_project(catalog.bow())
    with pytest.raises(PreconditionError):
        identify(a, {"X"}, {"X"})
    with pytest.raises(PreconditionError):
        identify(a, set(), {"Y"})
    with pytest.raises(PreconditionError):
        identify(a, {"U"}, {"Y"})


def test_deterministic_output():
    g = catalog.split_confounder()
    a = latent_project(g)
    outs = {render(identify(a, {"X1", "X2"}, {"Y"})) for _ in range(5)}
    outs |= {render(identify(latent_project(g), {"X2", "X1"}, {"Y"})) for _ in range(5)}
    assert len(outs) == 1


def test_random_graphs_against_oracle():
    rng = np.random.default_rng(42)
    identified = 0
    for _ in range(150):
        g = random_dag(rng, int(rng.integers(2, 6)), int(rng.integers(0, 3)), 0.5)
        obs = list(g.observed)
        if len(obs) < 2:
            continue
        k = int(rng.integers(1, len(obs)))
        t = set(rng.choice(obs, size=k, replace=False).tolist())
        rest = [v for v in obs if v not in t]
        s = set(rng.choice(rest, size=int(rng.integers(1, len(rest) + 1)), replace=False).tolist())
        e = identify(latent_project(g), t, s)
        if not is_identified(e):
            continue
        identified += 1
        for _ in range(2):
            assert_matches_oracle(g, e, t, s, random_model(g, rng))
    assert identified > 60
