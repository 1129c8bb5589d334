"""Small named graphs used throughout tests, fixtures and scripts.

Each labeled entry returns ``(graph, control_spec, labels)``.
"""

from __future__ import annotations

from .graph import CausalGraph, make_graph
from .labels import ControlSpec, LabelSet


def gated_mediator() -> CausalGraph:
    """X confounded with Z by latent U; T gates both W and Y."""
    return make_graph("Z X W T Y", "U", "U->Z U->X X->Z Z->W T->W T->Y W->Y")


def gated_mediator_labeled():
    g = gated_mediator()
    c = ControlSpec(("T",))
    return g, c, LabelSet.build(g, c, {(0,): {("Z", "W")}, (1,): {("W", "Y")}})


def gated_mediator_irregular():
    """Same graph with an extra label on an edge whose child has no control parent."""
    g = gated_mediator()
    c = ControlSpec(("T",))
    return g, c, LabelSet.build(g, c, {(0,): {("Z", "W")}, (1,): {("W", "Y"), ("X", "Z")}})


def xor_gate() -> CausalGraph:
    """T and Z feed X; T, Z and X feed a ternary Y."""
    return make_graph("T Z X Y", "", "T->Y Z->Y X->Y T->X Z->X", domains={"Y": 3})


def split_confounder() -> CausalGraph:
    """Two treatments, two mediators and three latent confounders; T feeds Y and Z2."""
    return make_graph(
        "X1 X2 Z1 Z2 Y T",
        "U1 U2 U3",
        "X1->Z1 X2->Z2 Z1->Y Z2->Y U1->X1 U1->X2 U2->X2 U2->Z1 U3->Z1 U3->Z2 T->Y T->Z2",
    )


def split_confounder_labeled():
    g = split_confounder()
    c = ControlSpec(("T",))
    return g, c, LabelSet.build(g, c, {(0,): {("Z1", "Y")}, (1,): {("X2", "Z2")}})


def switched_bow() -> CausalGraph:
    """Bow X->Y with latent U, plus a control C feeding both X and Y."""
    return make_graph("X Y C", "U", "X->Y U->X U->Y C->Y C->X")


def switched_bow_labeled():
    g = switched_bow()
    c = ControlSpec(("C",))
    return g, c, LabelSet.build(g, c, {(0,): {("U", "X")}, (1,): {("X", "Y")}})


def bow() -> CausalGraph:
    return make_graph("X Y", "U", "X->Y U->X U->Y")


def front_door() -> CausalGraph:
    return make_graph("X M Y", "U", "X->M M->Y U->X U->Y")


def backdoor_chain() -> CausalGraph:
    """Observed confounder Z of X and Y."""
    return make_graph("Z X Y", "", "Z->X Z->Y X->Y")


def markov_chain() -> CausalGraph:
    return make_graph("X Y", "", "X->Y")


def xor_gate_sem(flip_x=0, noise_y=0):
    """Binary T, Z; X = T xor Z; Y = T*X + Z.

    ``flip_x`` flips X with that probability. ``noise_y`` adds 1 or 2
    (mod 3) to Y, each with probability ``noise_y / 2``. With both positive
    the observed joint is strictly positive.
    """
    from fractions import Fraction

    from .distributions import compile_sem

    flip_x, noise_y = Fraction(flip_x), Fraction(noise_y)
    half = Fraction(1, 2)
    mechanisms = {
        "T": lambda pa, e: e,
        "Z": lambda pa, e: e,
        "X": lambda pa, e: (pa["T"] ^ pa["Z"]) ^ e,
        "Y": lambda pa, e: (pa["T"] * pa["X"] + pa["Z"] + e) % 3,
    }
    noise = {
        "T": {0: half, 1: half},
        "Z": {0: half, 1: half},
        "X": {0: 1 - flip_x, 1: flip_x},
        "Y": {0: 1 - noise_y, 1: noise_y / 2, 2: noise_y / 2},
    }
    return compile_sem(xor_gate(), mechanisms, noise)
