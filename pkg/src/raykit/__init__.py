"""raykit: finite-scale toolkit for rayed multigraphs.

Rayed graphs are finite multigraphs plus ray markers standing for ends of a
truncated infinite graph. The package provides the cycle-matroid rank oracle
for such graphs, weak-isomorphism checking and search, Whitney operations
with twist synthesis, Tutte decomposition, banana structure analysis,
leafless forest constructions, and a deterministic CLI.
"""

from .graphs import Multigraph, RayedGraph, Wedge, multigraph

__all__ = ["Multigraph", "RayedGraph", "Wedge", "multigraph"]
__version__ = "0.1.0"
