"""treecast: message-frugal spanning-tree construction and repair, simulated.

A discrete-event CONGEST-style runtime (synchronous rounds or adversarial
asynchronous delivery), tree protocols built on broadcast-and-echo sweeps
with randomized cut sketches, and forest algorithms that construct and
impromptu-repair (minimum) spanning trees using o(m) messages, verified
against centralized oracles.
"""

from .graphs import (Graph, TreeView, GraphError, InvalidEdgeError,
                     EncodingError, DomainError, canonical, edge_number,
                     edge_from_number, augmented_weight, split_augmented,
                     tree_of, cut_edges, marked_components, properly_marked,
                     format_graph_text, parse_graph_text, format_marks_text,
                     parse_marks_text)
from .sketches import (M61, SUPPORTED_HASH_WORDS, SketchError, ConfigError,
                       CapacityError, OddHash, PairwiseHash, Fingerprint,
                       is_prime, next_prime, choose_prime,
                       prefix_parity_vector, fingerprint_eval)
from .runtime import (SimConfig, RunReport, Message, Simulation, NodeRuntime,
                      RuntimeError_, TopologyError, OversizeError,
                      ScheduleError, node_stream, state_bits,
                      run_synchronous, run_asynchronous)
from .protocols import (AggregationSpec, FindState, broadcast_and_echo,
                        elect_leader, test_out, test_out_parallel,
                        hp_test_out, hp_probe, find_min, find_any)
from .algorithms import (UpdateEvent, build_mst, build_st,
                         run_cycle_breaking, repair_delete, repair_insert,
                         repair_weight, apply_update)
from .oracles import (OracleResult, kruskal, is_spanning_forest, min_cut_aug,
                      cut_edge_numbers)
from .generators import (MODELS, random_tree_plus, erdos_renyi, grid,
                         complete, generate)
from .experiments import (ExperimentSpec, run_experiment, write_csv,
                          eval_size_expr)

__version__ = "0.1.0"

__all__ = [
    "Graph", "TreeView", "GraphError", "InvalidEdgeError", "EncodingError",
    "DomainError", "canonical", "edge_number", "edge_from_number",
    "augmented_weight", "split_augmented", "tree_of", "cut_edges",
    "marked_components", "properly_marked", "format_graph_text",
    "parse_graph_text", "format_marks_text", "parse_marks_text",
    "M61", "SUPPORTED_HASH_WORDS", "SketchError", "ConfigError",
    "CapacityError", "OddHash", "PairwiseHash", "Fingerprint", "is_prime",
    "next_prime", "choose_prime", "prefix_parity_vector", "fingerprint_eval",
    "SimConfig", "RunReport", "Message", "Simulation", "NodeRuntime",
    "RuntimeError_", "TopologyError", "OversizeError", "ScheduleError",
    "node_stream", "state_bits", "run_synchronous", "run_asynchronous",
    "AggregationSpec", "FindState", "broadcast_and_echo", "elect_leader",
    "test_out", "test_out_parallel", "hp_test_out", "hp_probe", "find_min",
    "find_any", "UpdateEvent", "build_mst", "build_st", "run_cycle_breaking",
    "repair_delete", "repair_insert", "repair_weight", "apply_update",
    "OracleResult", "kruskal", "is_spanning_forest", "min_cut_aug",
    "cut_edge_numbers", "MODELS", "random_tree_plus", "erdos_renyi", "grid",
    "complete", "generate", "ExperimentSpec", "run_experiment", "write_csv",
    "eval_size_expr",
]
