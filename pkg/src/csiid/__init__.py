"""Causal effect identification with context-specific independence labels
on control variables."""

from .csi import identify_csi, learn_labels, learnable
from .distributions import DiscreteModel, JointTable, csi_holds, evaluate, intervene, joint
from .estimand import render, parse_sexpr
from .graph import CausalGraph, Variable, parse_graph
from .identification import Admg, identify, latent_project
from .labels import ControlSpec, LabelSet, is_maximal_regular, maximalize, regularize
from .separation import d_separated, docalc_rule_holds, inducing_path_exists, verma_equivalence_check

__version__ = "0.1.0"
