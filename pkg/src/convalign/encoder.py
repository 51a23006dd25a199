"""Attention-based graph encoders for the emotion and cause semantic spaces.

Each layer scores every edge with single-head additive attention, modulated
by the static edge weight before normalization:

    psi_ij   = leaky_relu(a . [W h_i ++ W h_j], slope 0.2) * A_ij
    alpha_ij = softmax over j in N(i) of psi_ij
    h_i_out  = sum over j in N(i) of alpha_ij * W h_j

The final layer's attention coefficients are the induced semantic-specific
adjacency. Two independent parameter stacks (spaces "E" and "C") run over
the one shared graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AttentionLayerParams,
    ConfigError,
    ContractViolation,
    ModelParams,
    ensure_finite,
    frozen,
    leaky_relu,
)
from .graph import ConversationGraph


@dataclass(frozen=True)
class EncoderOutput:
    """Node representations H (N x d_h) and induced adjacency A_induced (N x N).

    Each row of A_induced sums to 1 over the node's neighborhood and is zero
    outside graph edges.
    """

    H: np.ndarray
    A_induced: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "H", frozen(self.H))
        object.__setattr__(self, "A_induced", frozen(self.A_induced))


def attention_layer(
    H_in: np.ndarray,
    graph: ConversationGraph,
    layer_params: AttentionLayerParams,
) -> tuple[np.ndarray, np.ndarray]:
    """One message-passing layer; returns (H_out, attention matrix).

    Attention rows are normalized over each node's neighborhood; entries
    outside graph edges are exactly zero. Self-loops guarantee every
    neighborhood is non-empty.
    """
    H_in = np.asarray(H_in, dtype=np.float64)
    n = graph.n
    d_h = H_in.shape[1] if H_in.ndim == 2 else -1
    if H_in.shape[0] != n:
        raise ContractViolation(f"H_in has {H_in.shape[0]} rows for a {n}-node graph")
    W, a = layer_params.W, layer_params.a
    if W.shape != (d_h, d_h) or a.shape != (2 * d_h,):
        raise ContractViolation(
            f"layer params shaped {W.shape}/{a.shape} do not match d_h={d_h}"
        )

    projected = H_in @ W.T
    # additive score a . [W h_i ++ W h_j] splits into per-node halves
    left = projected @ a[:d_h]
    right = projected @ a[d_h:]
    scores = leaky_relu(left[:, None] + right[None, :]) * graph.adjacency

    mask = graph.adjacency > 0.0
    neg_inf = np.where(mask, scores, -np.inf)
    row_max = np.max(neg_inf, axis=1, keepdims=True)
    unnorm = np.where(mask, np.exp(neg_inf - row_max), 0.0)
    attn = unnorm / np.sum(unnorm, axis=1, keepdims=True)

    H_out = attn @ projected
    return ensure_finite(H_out, "encoder layer output"), attn


def encode(
    graph: ConversationGraph,
    params: ModelParams,
    space: str,
    num_layers: int | None = None,
) -> EncoderOutput:
    """Stack attention layers for one semantic space ("E" or "C").

    The induced adjacency is the final layer's attention matrix. num_layers
    defaults to every layer materialized for the space.
    """
    layers = params.encoder_layers(space)
    if num_layers is None:
        num_layers = len(layers)
    if num_layers < 1:
        raise ConfigError(f"encoder needs at least 1 layer, got {num_layers}")
    if num_layers > len(layers):
        raise ConfigError(
            f"encoder space {space!r} has {len(layers)} layers, {num_layers} requested"
        )

    h = graph.node_features
    attn = np.zeros((graph.n, graph.n))
    for layer_params in layers[:num_layers]:
        h, attn = attention_layer(h, graph, layer_params)
    return EncoderOutput(H=h, A_induced=attn)
