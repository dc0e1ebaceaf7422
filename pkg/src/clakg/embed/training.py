"""Link-prediction training loop: splits, negative sampling, AUC, descent.

Each epoch draws a fresh set of corrupted triples for the training
positives, runs a full-batch forward/backward pass, and applies one plain
gradient-descent step. Message passing uses only the training edges so
held-out test edges cannot leak into the encoder. Test negatives are
drawn once up front so the test AUC is comparable across epochs, and the
returned table snapshots the epoch with the highest test AUC.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigInvalid, NonFiniteLoss, SaturatedGraph, SingleClass
from .rgcn import (
    MessagePassing,
    RgcnConfig,
    RgcnParams,
    TripleGraph,
    backward,
    forward_cached,
    link_loss,
    link_loss_grad,
    score_backward,
    score_triples,
)
from .table import EmbeddingTable

_MAX_CORRUPTION_TRIES = 200


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    loss: float
    train_auc: float
    test_auc: float

    def as_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "loss": self.loss,
            "train_auc": self.train_auc,
            "test_auc": self.test_auc,
        }


def auc(labels, scores) -> float:
    """Probability a random positive outranks a random negative, ties at 1/2."""
    labels = np.asarray(labels, dtype=np.float64).ravel()
    scores = np.asarray(scores, dtype=np.float64).ravel()
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both a positive and a negative example")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(labels.size, dtype=np.float64)
    ranks[order] = np.arange(1, labels.size + 1)
    # average the ranks within tied score groups
    sorted_scores = scores[order]
    i = 0
    while i < labels.size:
        j = i
        while j + 1 < labels.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        if j > i:
            ranks[order[i : j + 1]] = 0.5 * (i + 1 + j + 1)
        i = j + 1
    pos_rank_sum = float(ranks[labels == 1].sum())
    u = pos_rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def sample_negatives(positives, graph: TripleGraph, seed: int) -> np.ndarray:
    """One corrupted triple per positive, each absent from the whole graph."""
    rng = np.random.default_rng(seed)
    return _sample_negatives(np.asarray(positives, dtype=np.int64), graph, rng)


def _sample_negatives(
    positives: np.ndarray, graph: TripleGraph, rng: np.random.Generator
) -> np.ndarray:
    positives = positives.reshape(-1, 3)
    out = np.empty_like(positives)
    edge_set = graph.edge_set
    n = graph.num_nodes
    for i, (s, r, o) in enumerate(positives):
        for _ in range(_MAX_CORRUPTION_TRIES):
            node = int(rng.integers(n))
            if rng.integers(2) == 0:
                candidate = (node, int(r), int(o))
            else:
                candidate = (int(s), int(r), node)
            if candidate not in edge_set:
                out[i] = candidate
                break
        else:
            raise SaturatedGraph(
                f"no absent corruption found for ({s},{r},{o}) "
                f"after {_MAX_CORRUPTION_TRIES} tries"
            )
    return out


def split_edges(
    triples: np.ndarray, test_size: float, rng: np.random.Generator, num_relations: int
) -> tuple[np.ndarray, np.ndarray]:
    """Random train/test edge split, stratified so every relation that has
    at least two edges appears in both parts."""
    train_rows = []
    test_rows = []
    for r in range(num_relations):
        rows = triples[triples[:, 1] == r]
        if len(rows) == 0:
            continue
        if len(rows) == 1:
            train_rows.append(rows)
            continue
        perm = rng.permutation(len(rows))
        n_test = int(round(test_size * len(rows)))
        n_test = min(max(n_test, 1), len(rows) - 1)
        test_rows.append(rows[perm[:n_test]])
        train_rows.append(rows[perm[n_test:]])
    train = np.concatenate(train_rows) if train_rows else np.empty((0, 3), dtype=np.int64)
    test = np.concatenate(test_rows) if test_rows else np.empty((0, 3), dtype=np.int64)
    return train, test


def train(
    graph: TripleGraph, config: Optional[RgcnConfig] = None
) -> tuple[EmbeddingTable, list[EpochMetrics]]:
    """Train embeddings on a graph; returns the best-epoch table and history."""
    config = config or RgcnConfig()
    config.validate()
    if len(graph.triples) == 0:
        raise ConfigInvalid("graph has no edges to train on")
    rng = np.random.default_rng(config.seed)
    params = RgcnParams.random(graph.num_nodes, graph.num_relations, config, rng)
    train_pos, test_pos = split_edges(
        graph.triples, config.test_size, rng, graph.num_relations
    )
    if config.num_epochs > 0 and len(test_pos) == 0:
        raise ConfigInvalid("test split is empty; graph too small for test_size")
    mp = MessagePassing(graph.num_nodes, graph.num_relations, train_pos)

    metrics: list[EpochMetrics] = []
    best: Optional[tuple[float, int, np.ndarray, np.ndarray]] = None

    if config.num_epochs > 0:
        test_neg = _sample_negatives(test_pos, graph, rng)
        test_batch = np.concatenate([test_pos, test_neg])
        test_y = np.concatenate([np.ones(len(test_pos)), np.zeros(len(test_neg))])
        train_y = np.concatenate([np.ones(len(train_pos)), np.zeros(len(train_pos))])

    for epoch in range(1, config.num_epochs + 1):
        train_neg = _sample_negatives(train_pos, graph, rng)
        batch = np.concatenate([train_pos, train_neg])
        cache = forward_cached(mp, params)
        scores = score_triples(cache.top, params.rel_vec, batch)
        loss = link_loss(train_y, scores, config.negative_ratio)
        if not np.isfinite(loss):
            raise NonFiniteLoss(epoch)
        d_scores = link_loss_grad(train_y, scores, config.negative_ratio)
        d_emb, d_rel = score_backward(cache.top, params.rel_vec, batch, d_scores)
        grads = backward(mp, params, cache, d_emb)
        grads.rel_vec += d_rel
        params.step(grads, config.learning_rate)

        emb = forward_cached(mp, params).top
        train_auc = auc(train_y, score_triples(emb, params.rel_vec, batch))
        test_auc = auc(test_y, score_triples(emb, params.rel_vec, test_batch))
        metrics.append(EpochMetrics(epoch, float(loss), train_auc, test_auc))
        if best is None or test_auc > best[0]:
            best = (test_auc, epoch, emb.copy(), params.rel_vec.copy())

    if best is None:
        emb = forward_cached(mp, params).top
        best = (float("nan"), 0, emb, params.rel_vec.copy())

    best_auc, best_epoch, emb, rel_vec = best
    table = EmbeddingTable.from_arrays(
        node_ids=graph.node_ids,
        node_vectors=emb,
        relation_names=graph.relation_names,
        relation_vectors=rel_vec,
        provenance={
            "h_dim": config.h_dim,
            "seed": config.seed,
            "epoch": best_epoch,
            "test_auc": best_auc,
            "num_nodes": graph.num_nodes,
            "num_relations": graph.num_relations,
            "config": config.as_dict(),
        },
    )
    return table, metrics
