"""Blocking partitions of planar and bounded-genus graphs, with exhaustive checkers."""

from .graph import Graph, GraphError, Partition
from .verify import blocking_number, verify_ell_blocking

__all__ = ["Graph", "GraphError", "Partition", "blocking_number", "verify_ell_blocking"]
__version__ = "0.1.0"
