"""Regenerate the files under fixtures/ (deterministic)."""

import itertools
import pathlib
from fractions import Fraction

import numpy as np

from csiid import catalog
from csiid.csi import identify_csi
from csiid.distributions import JointTable, format_joint, format_model, joint, random_model
from csiid.estimand import render
from csiid.graph import format_graph
from csiid.labels import format_labels

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def write(name, text):
    (OUT / name).write_text(text)
    print("wrote", OUT / name)


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(20240501)

    for stem, build, t, s in [
        ("switched_bow", catalog.switched_bow_labeled, {"X"}, {"Y"}),
        ("split_confounder", catalog.split_confounder_labeled, {"X1", "X2"}, {"Y"}),
        ("gated_mediator", catalog.gated_mediator_labeled, {"X"}, {"Y"}),
    ]:
        g, c, l = build()
        write(f"{stem}.graph", format_graph(g))
        write(f"{stem}.labels", format_labels(g, l))
        m = random_model(g, rng, l)
        write(f"{stem}.model", format_model(m))
        write(f"{stem}.joint", format_joint(joint(m)))
        write(f"{stem}.estimand", render(identify_csi(g, l, c, t, s)) + "\n")

    g = catalog.xor_gate()
    write("xor_gate.graph", format_graph(g))
    write("xor_gate_noisy.model", format_model(catalog.xor_gate_sem(Fraction(1, 10), Fraction(1, 5))))
    write("xor_gate_exact.joint", format_joint(joint(catalog.xor_gate_sem())))

    # product of uniform marginals over the same variables
    doms = [g.domain(v) for v in g.observed]
    cells = {k: Fraction(1, int(np.prod(doms))) for k in itertools.product(*(range(d) for d in doms))}
    write("xor_gate_product.joint", format_joint(JointTable(g.observed, tuple(doms), cells)))

    # reference formulas typed in by hand, independent of the library's output
    write(
        "switched_bow_reference.estimand",
        "(ctxmix ((C 0) (p (Y) given (X) ctx ((C 0))))\n        ((C 1) (p (Y) given () ctx ((C 1)))))\n",
    )
    write(
        "split_confounder_reference.estimand",
        "(ctxmix\n"
        "  ((T 0) (sum (Z2) (prod (p (Y) given (Z2) ctx ((T 0))) (p (Z2) given (X2) ctx ((T 0))))))\n"
        "  ((T 1) (sum (Z1 Z2) (prod (p (Y) given (Z1 Z2) ctx ((T 1))) (p (Z1 Z2) given (X1) ctx ((T 1)))))))\n",
    )
    write("constant.estimand", "(p () given ())\n")
    write("unknown_variable.estimand", "(p (Q) given (X))\n")
    write("bad_edge.graph", "var X observed\nvar Y observed\nedge X\n")


if __name__ == "__main__":
    main()
