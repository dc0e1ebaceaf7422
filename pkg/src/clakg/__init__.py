"""Law-article recommendation over a case-enhanced knowledge graph.

The package stores statutes and adjudicated cases in a schema-enforced
property graph, trains relational graph-convolution embeddings for link
prediction, retrieves candidate articles for a new case by key-phrase
matching plus cosine ranking, grounds an LLM recommendation in the
retrieved articles and precedent cases, and writes user-confirmed
outcomes back into the graph.
"""

from .graph import Graph, GraphStats, NodeKind, RelationKind

__version__ = "0.1.0"

__all__ = ["Graph", "GraphStats", "NodeKind", "RelationKind", "__version__"]
