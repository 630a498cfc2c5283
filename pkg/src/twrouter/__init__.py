"""Approximate maximum edge- and node-disjoint paths on graphs with small tree- or pathwidth."""

from .decomp import DecompositionError, RootedDecomposition, heuristic_decomposition, read_td, validate, write_td
from .estimators import EDPRouter, NDPRouter, WellLinkedDecomposer
from .formats import read_instance, write_instance
from .graph import CapGraph, InputError, Instance, Mode
from .hardness import MCCInstance, build_gadget, clique_to_routing, treedepth_witness, verify_equivalence
from .lp import fractional_solution, solve_relaxation
from .oracle import exact_maxedp, exact_maxndp
from .pathflow import PathFlow
from .router import BoundError, RouterReport, solve_edp, solve_ndp
from .routing import Routing, audit
from .wl import WLComponent, verify_wl_certificate, wl_decompose

__all__ = [
    "BoundError",
    "CapGraph",
    "DecompositionError",
    "EDPRouter",
    "InputError",
    "Instance",
    "MCCInstance",
    "Mode",
    "NDPRouter",
    "PathFlow",
    "RootedDecomposition",
    "RouterReport",
    "Routing",
    "WLComponent",
    "WellLinkedDecomposer",
    "audit",
    "build_gadget",
    "clique_to_routing",
    "exact_maxedp",
    "exact_maxndp",
    "fractional_solution",
    "heuristic_decomposition",
    "read_instance",
    "read_td",
    "solve_edp",
    "solve_ndp",
    "solve_relaxation",
    "treedepth_witness",
    "validate",
    "verify_equivalence",
    "wl_decompose",
    "write_instance",
    "write_td",
]
