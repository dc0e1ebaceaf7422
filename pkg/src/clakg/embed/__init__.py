"""Graph embedding training: relational message passing + DistMult scoring."""

from .kernels import active_backend, set_backend
from .rgcn import (
    MessagePassing,
    RgcnConfig,
    RgcnParams,
    TrainingTriple,
    TripleGraph,
    backward,
    forward,
    forward_cached,
    link_loss,
    link_loss_grad,
    logistic,
    score_backward,
    score_triples,
)
from .table import EmbeddingTable
from .training import EpochMetrics, auc, sample_negatives, split_edges, train

__all__ = [
    "MessagePassing",
    "RgcnConfig",
    "RgcnParams",
    "TrainingTriple",
    "TripleGraph",
    "EmbeddingTable",
    "EpochMetrics",
    "active_backend",
    "auc",
    "backward",
    "forward",
    "forward_cached",
    "link_loss",
    "link_loss_grad",
    "logistic",
    "sample_negatives",
    "score_backward",
    "score_triples",
    "set_backend",
    "split_edges",
    "train",
]
