from .forwarding import ForwardingGraph, build_graph, load_graph, save_graph, write_edges
from .modularity import modularity
from .leiden import Partition, leiden_partition, is_connected_partition
from .hits import HitsScores, hits
from .communities import (
    CommunityFlagReport,
    CommunityRow,
    flag_communities,
    normalized_mutual_info,
    read_partition,
    write_partition,
)

__all__ = [
    "ForwardingGraph", "build_graph", "load_graph", "save_graph", "write_edges",
    "modularity", "Partition", "leiden_partition", "is_connected_partition",
    "HitsScores", "hits", "CommunityFlagReport", "CommunityRow", "flag_communities",
    "normalized_mutual_info", "read_partition", "write_partition",
]
