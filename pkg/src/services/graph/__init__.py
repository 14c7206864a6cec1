from .cut import (
    BINARY_TOLERANCE,
    Cut,
    CutSummary,
    cut_from_function,
    cut_size_via_laplacian,
    edge_scan_cut_size,
    is_binary,
    threshold,
)
from .edge_list import (
    EdgeListParseError,
    EdgeListValidationError,
    MergePolicy,
    load_edge_list,
    load_edge_list_path,
    write_edge_list,
)
from .graph import (
    EdgeFunction,
    Graph,
    GraphProperties,
    NodeFunction,
    degree_distribution,
    graph_properties,
    inner_product_E,
    inner_product_V,
    remove_isolated_nodes,
)
from .random_stream import StreamTag, counter_rng

__all__ = [
    "BINARY_TOLERANCE",
    "Cut",
    "CutSummary",
    "EdgeFunction",
    "EdgeListParseError",
    "EdgeListValidationError",
    "Graph",
    "GraphProperties",
    "MergePolicy",
    "NodeFunction",
    "StreamTag",
    "counter_rng",
    "cut_from_function",
    "cut_size_via_laplacian",
    "degree_distribution",
    "edge_scan_cut_size",
    "graph_properties",
    "inner_product_E",
    "inner_product_V",
    "is_binary",
    "load_edge_list",
    "load_edge_list_path",
    "remove_isolated_nodes",
    "threshold",
    "write_edge_list",
]
