"""Signature-based bisimulation minimization of labeled transition systems."""
from .actions import ActionClass, ActionPartition, NotWellFounded, check_wellfounded, reverse_topological_order
from .distributed import OwnerMaps, Schedule, run_distributed_reduce
from .lts import TAU, Lts, LtsError, Partition, parse_aut, quotient, write_aut
from .oracle import coarsest_branching_bisimulation, coarsest_strong_bisimulation, is_branching_bisimulation
from .refine import Method, RefineStats, refine, refine_inductive_branching, refine_inductive_strong
from .scc import SccMap, eliminate_tau_sccs

__all__ = [
    "TAU",
    "ActionClass",
    "ActionPartition",
    "Lts",
    "LtsError",
    "Method",
    "NotWellFounded",
    "OwnerMaps",
    "Partition",
    "RefineStats",
    "SccMap",
    "Schedule",
    "check_wellfounded",
    "coarsest_branching_bisimulation",
    "coarsest_strong_bisimulation",
    "eliminate_tau_sccs",
    "is_branching_bisimulation",
    "parse_aut",
    "quotient",
    "refine",
    "refine_inductive_branching",
    "refine_inductive_strong",
    "reverse_topological_order",
    "run_distributed_reduce",
    "write_aut",
]
