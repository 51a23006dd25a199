"""Corpus-level scoring: micro P/R/F1 over pair decisions, presence-head F1,
the multi-cause conversation subset, and per-cause-count recall."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .core import Corpus, EvalInputError

if TYPE_CHECKING:
    from .predict import PairPredictionSet

Pair = tuple[int, int]


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    # 0/0 is defined as 0, never NaN
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


@dataclass(frozen=True)
class EvalReport:
    """Micro-averaged pair metrics plus the per-cause-count recall breakdown.

    ee_f1/ce_f1 are utterance-level presence F1 scores; they stay 0.0 unless
    the caller supplies head predictions (score_pairs alone has none).
    """

    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    per_cause_count_recall: Mapping[int, float] = field(default_factory=dict)
    ee_f1: float = 0.0
    ce_f1: float = 0.0

    def as_dict(self) -> dict:
        return {
            "ecpec": {"p": self.precision, "r": self.recall, "f1": self.f1},
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn},
            "per_cause_count_recall": {
                str(k): v for k, v in sorted(self.per_cause_count_recall.items())
            },
            "ee_f1": self.ee_f1,
            "ce_f1": self.ce_f1,
        }


def _check_ids(decisions: Mapping[str, object], gold: Mapping[str, object]) -> None:
    if set(decisions) != set(gold):
        missing = sorted(set(gold) - set(decisions))
        extra = sorted(set(decisions) - set(gold))
        raise EvalInputError(
            f"prediction/gold conversation ids do not align "
            f"(missing from predictions: {missing}, unexpected: {extra})"
        )


def _causes_by_emotion(pairs: Iterable[Pair]) -> dict[int, set[int]]:
    grouped: dict[int, set[int]] = {}
    for e, c in pairs:
        grouped.setdefault(int(e), set()).add(int(c))
    return grouped


def per_cause_count_recall(
    decisions: Mapping[str, Iterable[Pair]],
    gold: Mapping[str, Iterable[Pair]],
) -> dict[int, float]:
    """recall(k) over emotions with exactly k gold causes, all-or-nothing:
    an emotion counts as recalled only when every one of its k pairs is
    predicted."""
    _check_ids(decisions, gold)
    recalled: dict[int, int] = {}
    total: dict[int, int] = {}
    for cid in gold:
        predicted = {(int(e), int(c)) for e, c in decisions[cid]}
        for e, causes in _causes_by_emotion(gold[cid]).items():
            k = len(causes)
            total[k] = total.get(k, 0) + 1
            if all((e, c) in predicted for c in causes):
                recalled[k] = recalled.get(k, 0) + 1
    return {k: recalled.get(k, 0) / total[k] for k in total}


def score_pairs(
    decisions: Mapping[str, Iterable[Pair]],
    gold: Mapping[str, Iterable[Pair]],
    ee_f1: float = 0.0,
    ce_f1: float = 0.0,
) -> EvalReport:
    """Micro-average pair decisions against gold pairs across conversations."""
    _check_ids(decisions, gold)
    tp = fp = fn = 0
    for cid in gold:
        pred = {(int(e), int(c)) for e, c in decisions[cid]}
        truth = {(int(e), int(c)) for e, c in gold[cid]}
        tp += len(pred & truth)
        fp += len(pred - truth)
        fn += len(truth - pred)
    p, r, f1 = _prf(tp, fp, fn)
    return EvalReport(
        precision=p,
        recall=r,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        per_cause_count_recall=per_cause_count_recall(decisions, gold),
        ee_f1=ee_f1,
        ce_f1=ce_f1,
    )


def multi_cause_subset(corpus: Corpus) -> Corpus:
    """Keep the conversations where some emotion has two or more distinct
    gold causes. Idempotent."""
    kept = tuple(
        conv
        for conv in corpus.conversations
        if any(len(cs) >= 2 for cs in _causes_by_emotion(conv.gold_pairs).values())
    )
    return Corpus(d_u=corpus.d_u, conversations=kept)


def binary_f1(predicted: np.ndarray, gold: np.ndarray) -> float:
    """F1 of binary flags (1 = positive class)."""
    predicted = np.asarray(predicted, dtype=np.int64)
    gold = np.asarray(gold, dtype=np.int64)
    if predicted.shape != gold.shape:
        raise EvalInputError(
            f"flag arrays must have equal shape, got {predicted.shape} and {gold.shape}"
        )
    tp = int(np.sum((predicted == 1) & (gold == 1)))
    fp = int(np.sum((predicted == 1) & (gold == 0)))
    fn = int(np.sum((predicted == 0) & (gold == 1)))
    return _prf(tp, fp, fn)[2]


def evaluate_corpus(
    corpus: Corpus, predictions: Mapping[str, "PairPredictionSet"]
) -> EvalReport:
    """Score a full prediction run: pair metrics plus presence-head F1.

    Head flags are thresholded at 0.5 on the positive-class probability and
    micro-averaged over all utterances in corpus order.
    """
    gold = {c.conversation_id: c.gold_pairs for c in corpus.conversations}
    decisions = {cid: preds.decisions for cid, preds in predictions.items()}
    _check_ids(decisions, gold)
    ee_f1 = ce_f1 = 0.0
    if corpus.conversations:
        pred_em, pred_ca, gold_em, gold_ca = [], [], [], []
        for conv in corpus.conversations:
            preds = predictions[conv.conversation_id]
            pred_em.append((preds.ee_probs[:, 1] > 0.5).astype(np.int64))
            pred_ca.append((preds.ce_probs[:, 1] > 0.5).astype(np.int64))
            gold_em.append(conv.emotion_flags())
            gold_ca.append(conv.cause_flags())
        ee_f1 = binary_f1(np.concatenate(pred_em), np.concatenate(gold_em))
        ce_f1 = binary_f1(np.concatenate(pred_ca), np.concatenate(gold_ca))
    return score_pairs(decisions, gold, ee_f1=ee_f1, ce_f1=ce_f1)
