"""Coordinator-model simulator for distributed approximate maximum matching."""

from .distributions import HardInstance, build_hard_instance, classify_edges, disj_eval, instance_to_graph
from .graph import (
    BipartiteGraph,
    EdgePartition,
    Matching,
    approximation_ratio,
    greedy_maximal_matching,
    is_matching,
    maximum_matching,
)
from .protocols import PROTOCOLS, get_protocol, luby_distributed, sequential_greedy, two_step
from .reduction import protocol_p, reduce_inputs
from .simulator import CostLedger, ProtocolRun, run_protocol

__version__ = "0.1.0"
