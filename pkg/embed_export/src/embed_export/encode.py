"""Frozen pretrained-LM utterance encoding.

Wraps a transformers model in inference mode and turns a list of utterance
texts into one fixed-width vector each by mean pooling the final-layer token
states under the attention mask. Texts longer than the model window are
truncated; each truncation is reported through the package logger so lossy
exports are visible in the log.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

logger = logging.getLogger("embed_export")


class UtteranceEncoder:
    """Batch encoder over a frozen pretrained language model.

    The model and tokenizer are resolved with the transformers Auto classes,
    so any hub name or local directory with a compatible checkpoint works.
    No parameters are updated and no dropout is active, which makes repeated
    encoding of the same texts bit-identical within an environment.
    """

    def __init__(self, model_name_or_path: str, batch_size: int = 16):
        import torch
        from transformers import AutoModel, AutoTokenizer

        if batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name_or_path)
        self.model = AutoModel.from_pretrained(model_name_or_path)
        self.model.eval()
        self.batch_size = int(batch_size)

    @property
    def hidden_size(self) -> int:
        return int(self.model.config.hidden_size)

    @property
    def max_length(self) -> int:
        return int(self.tokenizer.model_max_length)

    def encode(self, texts: Sequence[str], labels: Sequence[str] | None = None) -> np.ndarray:
        """Return a float array of shape (len(texts), hidden_size).

        ``labels`` supplies one display name per text for truncation
        warnings; positions are used when it is omitted.
        """
        if labels is None:
            labels = [f"utterance #{i + 1}" for i in range(len(texts))]
        if len(labels) != len(texts):
            raise ValueError("labels must match texts one to one")
        rows: list[np.ndarray] = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start:start + self.batch_size])
            batch_labels = labels[start:start + self.batch_size]
            self._warn_truncated(batch, batch_labels)
            rows.append(self._encode_batch(batch))
        if not rows:
            return np.zeros((0, self.hidden_size), dtype=np.float64)
        return np.concatenate(rows, axis=0)

    def _warn_truncated(self, batch: list[str], batch_labels: Sequence[str]) -> None:
        cap = self.max_length
        full = self.tokenizer(batch, truncation=False, padding=False)["input_ids"]
        for label, ids in zip(batch_labels, full):
            if len(ids) > cap:
                logger.warning(
                    "%s: %d tokens exceed the model window, truncated to %d",
                    label, len(ids), cap,
                )

    def _encode_batch(self, batch: list[str]) -> np.ndarray:
        torch = self._torch
        encoded = self.tokenizer(
            batch, padding=True, truncation=True, return_tensors="pt"
        )
        with torch.no_grad():
            hidden = self.model(**encoded).last_hidden_state
        mask = encoded["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        summed = (hidden * mask).sum(dim=1)
        counts = mask.sum(dim=1).clamp(min=1.0)
        pooled = summed / counts
        return pooled.cpu().numpy().astype(np.float64)
