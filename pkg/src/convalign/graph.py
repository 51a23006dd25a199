"""Conversation-graph construction: speaker-aware node features and typed,
weighted edges over utterances.

Three symmetric edge conditions connect utterances i and j:

* global contextual: cos(x_i, x_j) + 1 > tau_s (strict), weight (cos + 1) / 2
* local contextual:  |i - j| <= window,           weight exp(-|i - j| / tau_e)
* intra-speaker:     same speaker and i != j,     weight (exp(-|i-j|/tau_e) + 1) / 2

A pair qualifying under several types keeps all type tags and the maximum
weight. The local condition at distance 0 guarantees a self-loop of weight 1
on every node.

Pairs are evaluated with scalar arithmetic (shared cosine helper plus
math.exp) so an independent per-pair oracle reproduces the adjacency
bit-exactly; N < 100 keeps the loop cost irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ContractViolation,
    ConversationRecord,
    CorpusFormatError,
    HyperParams,
    ModelParams,
    cosine_similarity,
    ensure_finite,
    frozen,
)

EdgeTypeMap = Mapping[tuple[int, int], frozenset["EdgeType"]]


class EdgeType(Enum):
    GLOBAL_CONTEXTUAL = "global"
    LOCAL_CONTEXTUAL = "local"
    INTRA_SPEAKER = "intra_speaker"


@dataclass(frozen=True)
class ConversationGraph:
    """Shared conversation graph: node features, weighted adjacency, type tags.

    Node indices are 0-based matrix positions; utterance k (1-based) is node
    k - 1. edge_types carries both (i, j) and (j, i) for every edge, so
    membership mirrors the symmetric adjacency.
    """

    node_features: np.ndarray
    adjacency: np.ndarray
    edge_types: EdgeTypeMap
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_features", frozen(self.node_features))
        object.__setattr__(self, "adjacency", frozen(self.adjacency))

    def neighborhood(self, i: int) -> np.ndarray:
        """Indices j with A_ij > 0 (always includes i via the self-loop)."""
        return np.flatnonzero(self.adjacency[i] > 0.0)


def build_node_features(conv: ConversationRecord, params: ModelParams) -> np.ndarray:
    """Stack per-utterance rows [utterance embedding ++ speaker embedding].

    Row i has length d_h = d_u + d_s. Unseen speaker ids get deterministic
    seeded embeddings from the params seed.
    """
    if conv.n == 0:
        return np.zeros((0, params.d_h))
    if conv.d_u != params.d_u:
        raise CorpusFormatError(
            f"conversation {conv.conversation_id!r}: field 'embedding' has dimension "
            f"{conv.d_u}, params declare d_u={params.d_u}"
        )
    rows = [
        np.concatenate([u.embedding, params.speaker_vector(u.speaker_id)])
        for u in conv.utterances
    ]
    return ensure_finite(np.stack(rows), "node features")


def build_edges(
    features: np.ndarray,
    speakers: Sequence[int],
    hp: HyperParams,
) -> tuple[dict[tuple[int, int], frozenset[EdgeType]], np.ndarray]:
    """Evaluate the three edge conditions for every pair and take the max weight.

    Returns the type-tag map (both orders per edge) and the symmetric
    adjacency. The diagonal always carries a local edge of weight exp(0) = 1.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if n < 1:
        raise ContractViolation("build_edges needs at least one utterance")
    if len(speakers) != n:
        raise ContractViolation(
            f"speaker list length {len(speakers)} does not match {n} feature rows"
        )

    adjacency = np.zeros((n, n))
    edge_types: dict[tuple[int, int], frozenset[EdgeType]] = {}
    for i in range(n):
        for j in range(i, n):
            distance = j - i
            types = set()
            weight = 0.0
            cos = cosine_similarity(features[i], features[j])
            if cos + 1.0 > hp.tau_s:
                types.add(EdgeType.GLOBAL_CONTEXTUAL)
                weight = max(weight, (cos + 1.0) / 2.0)
            if distance <= hp.window:
                types.add(EdgeType.LOCAL_CONTEXTUAL)
                weight = max(weight, math.exp(-distance / hp.tau_e))
            if speakers[i] == speakers[j] and i != j:
                types.add(EdgeType.INTRA_SPEAKER)
                weight = max(weight, (math.exp(-distance / hp.tau_e) + 1.0) / 2.0)
            if types:
                tags = frozenset(types)
                adjacency[i, j] = adjacency[j, i] = weight
                edge_types[(i, j)] = tags
                if i != j:
                    edge_types[(j, i)] = tags
    return edge_types, adjacency


def build_graph(
    conv: ConversationRecord, params: ModelParams, hp: HyperParams
) -> ConversationGraph:
    """Compose node features and edges into the shared conversation graph."""
    features = build_node_features(conv, params)
    edge_types, adjacency = build_edges(features, conv.speakers, hp)
    return ConversationGraph(
        node_features=features, adjacency=adjacency, edge_types=edge_types, n=conv.n
    )
