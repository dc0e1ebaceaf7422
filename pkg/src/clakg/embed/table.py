"""Embedding table container and its JSON file format.

Vectors are stored quantized to 9 significant decimal digits, the same
precision the file format carries, so a table written to disk and read
back compares bit-for-bit equal to the in-memory original.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch, FormatError, UnknownNode


def _quantize(value: float) -> float:
    if not math.isfinite(value):
        return value
    return float(f"{value:.9g}")


_quantize_array = np.vectorize(_quantize, otypes=[np.float64])


class EmbeddingTable:
    """Per-node and per-relation vectors plus training provenance."""

    def __init__(
        self,
        nodes: dict[int, np.ndarray],
        relations: dict[str, np.ndarray],
        provenance: dict,
    ):
        self.nodes = nodes
        self.relations = relations
        self.provenance = dict(provenance)

    @classmethod
    def from_arrays(
        cls,
        node_ids: Sequence,
        node_vectors: np.ndarray,
        relation_names: Sequence[str],
        relation_vectors: np.ndarray,
        provenance: dict,
    ) -> "EmbeddingTable":
        node_vectors = _quantize_array(np.asarray(node_vectors, dtype=np.float64))
        relation_vectors = _quantize_array(np.asarray(relation_vectors, dtype=np.float64))
        nodes = {int(nid): node_vectors[i].copy() for i, nid in enumerate(node_ids)}
        relations = {
            str(name): relation_vectors[i].copy()
            for i, name in enumerate(relation_names)
        }
        return cls(nodes, relations, provenance)

    @property
    def h_dim(self) -> int:
        return int(self.provenance["h_dim"])

    def vector(self, node_id: int) -> np.ndarray:
        vec = self.nodes.get(int(node_id))
        if vec is None:
            raise UnknownNode(f"no embedding for node {node_id}")
        return vec

    def score(self, s: int, relation: str, o: int) -> float:
        """Diagonal bilinear triple score straight off the table."""
        rel = self.relations.get(str(relation))
        if rel is None:
            raise UnknownNode(f"no embedding for relation {relation!r}")
        return float(np.sum(self.vector(s) * self.vector(o) * rel))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        if self.provenance != other.provenance:
            return False
        if set(self.nodes) != set(other.nodes) or set(self.relations) != set(other.relations):
            return False
        return all(
            np.array_equal(vec, other.nodes[nid]) for nid, vec in self.nodes.items()
        ) and all(
            np.array_equal(vec, other.relations[name])
            for name, vec in self.relations.items()
        )

    # --- persistence -----------------------------------------------------

    def save(self, path: str) -> None:
        payload = {
            "provenance": self.provenance,
            "nodes": {str(nid): [float(x) for x in self.nodes[nid]] for nid in sorted(self.nodes)},
            "relations": {
                name: [float(x) for x in vec] for name, vec in sorted(self.relations.items())
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "EmbeddingTable":
        with open(path, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid embedding file: {exc.msg}") from exc
        for section in ("provenance", "nodes", "relations"):
            if section not in payload:
                raise FormatError(f"embedding file missing {section!r} section")
        provenance = payload["provenance"]
        if "h_dim" not in provenance:
            raise FormatError("provenance missing 'h_dim'")
        h_dim = int(provenance["h_dim"])
        nodes: dict[int, np.ndarray] = {}
        for key, values in payload["nodes"].items():
            try:
                node_id = int(key)
            except ValueError as exc:
                raise FormatError(f"non-integer node id {key!r}") from exc
            vec = np.asarray(values, dtype=np.float64)
            if vec.shape != (h_dim,):
                raise DimensionMismatch(
                    f"node {key} vector has length {vec.shape[0]}, expected {h_dim}"
                )
            nodes[node_id] = vec
        relations: dict[str, np.ndarray] = {}
        for name, values in payload["relations"].items():
            vec = np.asarray(values, dtype=np.float64)
            if vec.shape != (h_dim,):
                raise DimensionMismatch(
                    f"relation {name!r} vector has length {vec.shape[0]}, expected {h_dim}"
                )
            relations[name] = vec
        declared = provenance.get("num_nodes")
        if declared is not None and int(declared) != len(nodes):
            raise FormatError(
                f"provenance declares {declared} nodes but file holds {len(nodes)}"
            )
        declared = provenance.get("num_relations")
        if declared is not None and int(declared) != len(relations):
            raise FormatError(
                f"provenance declares {declared} relations but file holds {len(relations)}"
            )
        return cls(nodes, relations, provenance)
