"""Pairwise scoring, global-local fusion, utterance-level heads, and losses.

The local score s_ij is a 2-layer MLP with sigmoid output over the
concatenated emotion-side and cause-side rows [h_i_E ++ h_j_C]; the fused
score is the convex combination y_hat = beta * T_tilde + (1 - beta) * s.
Emotion/cause presence heads are 2-class softmax MLPs over each space.

All ordered pairs (i, j) are scored; pair decisions use the 1-based
utterance numbering of the corpus schema so they compare directly against
gold_pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import (
    ContractViolation,
    ConversationRecord,
    HyperParams,
    MlpParams,
    ModelParams,
    ensure_finite,
    frozen,
    leaky_relu,
)

# probabilities are clamped to [PROB_FLOOR, 1 - PROB_FLOOR] before any log
PROB_FLOOR = 1e-7


@dataclass(frozen=True)
class PairPredictionSet:
    """Local scores s, fused scores y_hat, thresholded pair decisions, and
    per-utterance emotion/cause presence probabilities.

    decisions holds (emotion_index, cause_index) pairs in 1-based utterance
    numbering; ee_probs/ce_probs rows are [p(absent), p(present)].
    """

    s: np.ndarray
    y_hat: np.ndarray
    decisions: frozenset[tuple[int, int]]
    ee_probs: np.ndarray
    ce_probs: np.ndarray

    def __post_init__(self) -> None:
        for name in ("s", "y_hat", "ee_probs", "ce_probs"):
            object.__setattr__(self, name, frozen(getattr(self, name)))
        object.__setattr__(self, "decisions", frozenset(self.decisions))


@dataclass(frozen=True)
class LossReport:
    """All loss terms and their weighted aggregates."""

    l_pair: float
    l_ot: float
    l_ee: float
    l_ce: float
    l_ecpec: float
    l_total: float

    def as_dict(self) -> dict[str, float]:
        return {
            "l_pair": self.l_pair,
            "l_ot": self.l_ot,
            "l_ee": self.l_ee,
            "l_ce": self.l_ce,
            "l_ecpec": self.l_ecpec,
            "l_total": self.l_total,
        }


def pair_score(H_E: np.ndarray, H_C: np.ndarray, pair_mlp: MlpParams) -> np.ndarray:
    """Score every ordered pair: s_ij = sigmoid(mlp([h_i_E ++ h_j_C])).

    The hidden layer splits across the concatenation, so the N^2 pair grid
    is evaluated without materializing N^2 concatenated inputs.
    """
    H_E = np.asarray(H_E, dtype=np.float64)
    H_C = np.asarray(H_C, dtype=np.float64)
    if H_E.ndim != 2 or H_C.ndim != 2 or H_E.shape != H_C.shape:
        raise ContractViolation(
            f"pair_score needs equal-shape row matrices, got {H_E.shape} and {H_C.shape}"
        )
    d_h = H_E.shape[1]
    if pair_mlp.W0.shape[1] != 2 * d_h:
        raise ContractViolation(
            f"pair MLP expects input dim {pair_mlp.W0.shape[1]}, got 2*{d_h}"
        )
    w_emotion = pair_mlp.W0[:, :d_h]
    w_cause = pair_mlp.W0[:, d_h:]
    part_e = H_E @ w_emotion.T
    part_c = H_C @ w_cause.T
    hidden = leaky_relu(part_e[:, None, :] + part_c[None, :, :] + pair_mlp.b0)
    logits = hidden @ pair_mlp.W1[0] + pair_mlp.b1[0]
    return ensure_finite(expit(logits), "pair scores")


def fuse_scores(T_tilde: np.ndarray, s: np.ndarray, beta: float) -> np.ndarray:
    """Convex combination y_hat = beta * T_tilde + (1 - beta) * s."""
    T_tilde = np.asarray(T_tilde, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if T_tilde.shape != s.shape:
        raise ContractViolation(
            f"fuse_scores needs equal shapes, got {T_tilde.shape} and {s.shape}"
        )
    if not 0.0 <= beta <= 1.0:
        raise ContractViolation(f"beta must be in [0, 1], got {beta}")
    return beta * T_tilde + (1.0 - beta) * s


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=1, keepdims=True)


def ee_ce_heads(
    H_E: np.ndarray,
    H_C: np.ndarray,
    ee_mlp: MlpParams,
    ce_mlp: MlpParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-utterance 2-class probabilities: emotion head over the emotion
    space, cause head over the cause space."""
    H_E = np.asarray(H_E, dtype=np.float64)
    H_C = np.asarray(H_C, dtype=np.float64)
    ee_probs = _softmax_rows(ee_mlp.forward(H_E))
    ce_probs = _softmax_rows(ce_mlp.forward(H_C))
    return ee_probs, ce_probs


def decide_pairs(y_hat: np.ndarray, threshold: float) -> frozenset[tuple[int, int]]:
    """Pairs with fused score strictly above the threshold, 1-based indices."""
    rows, cols = np.nonzero(y_hat > threshold)
    return frozenset((int(i) + 1, int(j) + 1) for i, j in zip(rows, cols))


def predict_pairs(
    H_E: np.ndarray,
    H_C: np.ndarray,
    T_tilde: np.ndarray,
    params: ModelParams,
    hp: HyperParams,
) -> PairPredictionSet:
    """Assemble the full prediction set for one conversation."""
    s = pair_score(H_E, H_C, params.pair_mlp)
    y_hat = fuse_scores(T_tilde, s, hp.beta)
    ee_probs, ce_probs = ee_ce_heads(H_E, H_C, params.ee_mlp, params.ce_mlp)
    return PairPredictionSet(
        s=s,
        y_hat=y_hat,
        decisions=decide_pairs(y_hat, hp.decision_threshold),
        ee_probs=ee_probs,
        ce_probs=ce_probs,
    )


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)


def gold_pair_matrix(conv: ConversationRecord) -> np.ndarray:
    """Binary N x N matrix with y[e-1, c-1] = 1 for each gold pair."""
    y = np.zeros((conv.n, conv.n))
    for e, c in conv.gold_pairs:
        y[e - 1, c - 1] = 1.0
    return y


def losses(
    preds: PairPredictionSet,
    T_tilde: np.ndarray,
    gold: ConversationRecord,
    hp: HyperParams,
) -> LossReport:
    """Evaluate every loss term against the gold annotations.

    l_pair: mean binary cross-entropy of the fused scores over all ordered
    pairs. l_ot: mean KL(Bern(s_ij) || Bern(T_tilde_ij)). l_ee / l_ce: mean
    2-class cross-entropy of the presence heads. Probabilities are clamped
    before logs, so no term is ever NaN.
    """
    n = gold.n
    if preds.y_hat.shape != (n, n):
        raise ContractViolation(
            f"predictions shaped {preds.y_hat.shape} do not match conversation of {n} utterances"
        )
    y = gold_pair_matrix(gold)
    y_hat = _clamp(preds.y_hat)
    l_pair = float(np.mean(-(y * np.log(y_hat) + (1.0 - y) * np.log(1.0 - y_hat))))

    s = _clamp(preds.s)
    t = _clamp(np.asarray(T_tilde, dtype=np.float64))
    l_ot = float(
        np.mean(s * np.log(s / t) + (1.0 - s) * np.log((1.0 - s) / (1.0 - t)))
    )

    ee = _clamp(preds.ee_probs)
    ce = _clamp(preds.ce_probs)
    idx = np.arange(n)
    l_ee = float(np.mean(-np.log(ee[idx, gold.emotion_flags()])))
    l_ce = float(np.mean(-np.log(ce[idx, gold.cause_flags()])))

    l_ecpec = l_pair + hp.lambda_ot * l_ot
    l_total = l_ecpec + hp.lambda_ee * l_ee + hp.lambda_ce * l_ce
    return LossReport(
        l_pair=l_pair, l_ot=l_ot, l_ee=l_ee, l_ce=l_ce, l_ecpec=l_ecpec, l_total=l_total
    )
