"""Shared domain types, numeric helpers, and the deterministic parameter RNG.

Everything downstream works on plain float64 numpy arrays. Conversations are
short (N < 100), so dense storage is used throughout. Public helpers are pure
functions; container types are frozen after construction and safe to share
across threads.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np


class ContractViolation(ValueError):
    """An operation was called with arguments that break its contract."""


class CorpusFormatError(ValueError):
    """A corpus record does not conform to the corpus JSON schema."""


class ConfigError(ValueError):
    """Invalid hyperparameter, parameter-file, or run configuration."""


class EvalInputError(ValueError):
    """Predictions and gold annotations do not line up."""


# ---------------------------------------------------------------------------
# Numeric helpers
# ---------------------------------------------------------------------------


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two equal-length vectors, in [-1, 1].

    Returns 0.0 when either vector has zero norm: degraded inputs must not
    abort a batch run.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ContractViolation(
            f"cosine_similarity needs equal-length vectors, got {a.shape} and {b.shape}"
        )
    norm_a = math.sqrt(float(np.dot(a, a)))
    norm_b = math.sqrt(float(np.dot(b, b)))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    value = float(np.dot(a, b)) / (norm_a * norm_b)
    return min(1.0, max(-1.0, value))


def stable_softmax(v: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Softmax of v / temperature with max-subtraction, safe for large inputs.

    Output entries are positive and sum to 1; adding a constant to v leaves
    the result unchanged.
    """
    if temperature <= 0.0:
        raise ContractViolation(f"softmax temperature must be > 0, got {temperature}")
    v = np.asarray(v, dtype=np.float64)
    z = v / temperature
    z = z - np.max(z)
    e = np.exp(z)
    return e / np.sum(e)


def leaky_relu(x: np.ndarray, slope: float = 0.2) -> np.ndarray:
    """Leaky-rectified activation, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0.0, x, slope * x)


def ensure_finite(arr: np.ndarray, what: str) -> np.ndarray:
    """Raise ContractViolation if arr contains NaN or Inf."""
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{what} contains non-finite entries")
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    """Return a read-only float64 copy of arr."""
    out = np.array(arr, dtype=np.float64, order="C", copy=True)
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# Deterministic parameter RNG (SplitMix64, counter form)
#
# state_k = (seed + k * GAMMA) mod 2^64 for k = 1, 2, ...
# mix64(z): z ^= z >> 30; z *= M1; z ^= z >> 27; z *= M2; z ^= z >> 31
# uniform  u_k = ((mix64(state_k) >> 11) + 0.5) * 2^-53   in (0, 1)
# ---------------------------------------------------------------------------

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix64_uniform(seed: int, count: int) -> np.ndarray:
    """count uniforms in (0, 1) from the SplitMix64 stream for seed."""
    ks = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + ks * _GAMMA
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def seeded_init(shape: int | tuple[int, ...], seed: int) -> np.ndarray:
    """Deterministic uniform(-r, r) init with r = 1/sqrt(fan_in).

    fan_in is the trailing dimension for matrices and the length for
    vectors. Entries are drawn in row-major order from the SplitMix64
    stream for seed; identical (shape, seed) gives bit-identical output.
    """
    if isinstance(shape, int):
        shape = (shape,)
    if len(shape) not in (1, 2) or any(d <= 0 for d in shape):
        raise ContractViolation(f"seeded_init needs positive 1-D or 2-D shape, got {shape}")
    fan_in = shape[-1] if len(shape) == 2 else shape[0]
    r = 1.0 / math.sqrt(fan_in)
    u = _splitmix64_uniform(seed, int(np.prod(shape)))
    return (r * (2.0 * u - 1.0)).reshape(shape)


def block_seed(seed: int, name: str) -> int:
    """Per-block seed: first 8 bytes (big-endian) of SHA-256("{seed}:{name}")."""
    digest = hashlib.sha256(f"{seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


# ---------------------------------------------------------------------------
# Conversation data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Utterance:
    """One speaker turn: 1-based index, speaker id, embedding, gold flags."""

    index: int
    speaker_id: int
    embedding: np.ndarray
    emotion_label: int
    cause_label: int
    text: str | None = None

    def __post_init__(self) -> None:
        emb = np.asarray(self.embedding, dtype=np.float64)
        if emb.ndim != 1:
            raise CorpusFormatError(
                f"utterance {self.index}: embedding must be a flat vector, got shape {emb.shape}"
            )
        object.__setattr__(self, "embedding", frozen(emb))
        if self.emotion_label not in (0, 1) or self.cause_label not in (0, 1):
            raise CorpusFormatError(
                f"utterance {self.index}: emotion/cause labels must be 0 or 1"
            )


@dataclass(frozen=True)
class ConversationRecord:
    """A conversation: ordered utterances plus gold emotion-cause pairs.

    gold_pairs holds (emotion_index, cause_index) in the 1-based utterance
    numbering used by the corpus schema.
    """

    conversation_id: str
    utterances: tuple[Utterance, ...]
    gold_pairs: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "utterances", tuple(self.utterances))
        object.__setattr__(
            self, "gold_pairs", frozenset((int(e), int(c)) for e, c in self.gold_pairs)
        )
        cid = self.conversation_id
        n = len(self.utterances)
        indices = [u.index for u in self.utterances]
        if indices != list(range(1, n + 1)):
            raise CorpusFormatError(
                f"conversation {cid!r}: field 'utterances' must have index values 1..{n} "
                f"with no gaps, got {indices}"
            )
        dims = {u.embedding.shape[0] for u in self.utterances}
        if len(dims) > 1:
            raise CorpusFormatError(
                f"conversation {cid!r}: field 'embedding' has inconsistent dimensions {sorted(dims)}"
            )
        for e, c in self.gold_pairs:
            if not (1 <= e <= n and 1 <= c <= n):
                raise CorpusFormatError(
                    f"conversation {cid!r}: field 'gold_pairs' entry ({e}, {c}) references "
                    f"an utterance outside 1..{n}"
                )

    @property
    def n(self) -> int:
        return len(self.utterances)

    @property
    def d_u(self) -> int:
        return self.utterances[0].embedding.shape[0] if self.utterances else 0

    @property
    def speakers(self) -> tuple[int, ...]:
        return tuple(u.speaker_id for u in self.utterances)

    def embedding_matrix(self) -> np.ndarray:
        return np.stack([u.embedding for u in self.utterances]) if self.utterances else np.zeros((0, 0))

    def emotion_flags(self) -> np.ndarray:
        return np.array([u.emotion_label for u in self.utterances], dtype=np.int64)

    def cause_flags(self) -> np.ndarray:
        return np.array([u.cause_label for u in self.utterances], dtype=np.int64)


@dataclass(frozen=True)
class Corpus:
    """A corpus file: declared utterance-embedding dimension plus conversations."""

    d_u: int
    conversations: tuple[ConversationRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "conversations", tuple(self.conversations))
        for conv in self.conversations:
            if conv.n and conv.d_u != self.d_u:
                raise CorpusFormatError(
                    f"conversation {conv.conversation_id!r}: field 'embedding' has dimension "
                    f"{conv.d_u}, corpus declares d_u={self.d_u}"
                )


# ---------------------------------------------------------------------------
# Hyperparameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HyperParams:
    """Run hyperparameters. Defaults follow the reference configuration."""

    window: int = 5
    tau_s: float = 0.5
    tau_e: float = 2.0
    tau_r: float = 1.0
    alpha: float = 0.8
    beta: float = 0.4
    epsilon: float = 0.5
    lambda_ee: float = 0.2
    lambda_ce: float = 0.4
    lambda_ot: float = 1.0
    layers: int = 2
    d_s: int = 50
    outer_iters: int = 20
    sinkhorn_iters: int = 500
    sinkhorn_tol: float = 1e-7
    outer_tol: float = 1e-6
    decision_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.window < 0:
            raise ConfigError(f"window must be >= 0, got {self.window}")
        if self.tau_e <= 0.0:
            raise ConfigError(f"tau_e must be > 0, got {self.tau_e}")
        if self.tau_r <= 0.0:
            raise ConfigError(f"tau_r must be > 0, got {self.tau_r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if self.epsilon < 1e-4:
            raise ConfigError(f"epsilon must be >= 1e-4, got {self.epsilon}")
        for name in ("lambda_ee", "lambda_ce", "lambda_ot"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.layers < 1:
            raise ConfigError(f"layers must be >= 1, got {self.layers}")
        if self.d_s < 1:
            raise ConfigError(f"d_s must be >= 1, got {self.d_s}")
        if self.outer_iters < 1 or self.sinkhorn_iters < 1:
            raise ConfigError("iteration caps must be >= 1")
        if self.sinkhorn_tol <= 0.0 or self.outer_tol <= 0.0:
            raise ConfigError("convergence tolerances must be > 0")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ConfigError(
                f"decision_threshold must be in (0, 1), got {self.decision_threshold}"
            )


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttentionLayerParams:
    """One encoder layer: projection W (d_h x d_h) and attention vector a (2*d_h)."""

    W: np.ndarray
    a: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "W", frozen(self.W))
        object.__setattr__(self, "a", frozen(self.a))


@dataclass(frozen=True)
class MlpParams:
    """Two-layer MLP weights: hidden layer (W0, b0) and output layer (W1, b1)."""

    W0: np.ndarray
    b0: np.ndarray
    W1: np.ndarray
    b1: np.ndarray

    def __post_init__(self) -> None:
        for name in ("W0", "b0", "W1", "b1"):
            object.__setattr__(self, name, frozen(getattr(self, name)))

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Hidden leaky-relu layer followed by a linear output layer."""
        hidden = leaky_relu(x @ self.W0.T + self.b0)
        return hidden @ self.W1.T + self.b1


# (block name, shape builder) pairs for every named tensor in the params file
def _block_shapes(d_u: int, d_s: int, layers: int) -> dict[str, tuple[int, ...]]:
    d_h = d_u + d_s
    shapes: dict[str, tuple[int, ...]] = {}
    for space in ("E", "C"):
        for layer in range(layers):
            shapes[f"encoder.{space}.layer{layer}.W"] = (d_h, d_h)
            shapes[f"encoder.{space}.layer{layer}.a"] = (2 * d_h,)
    shapes["pair_mlp.layer0.W"] = (d_h, 2 * d_h)
    shapes["pair_mlp.layer0.b"] = (d_h,)
    shapes["pair_mlp.layer1.W"] = (1, d_h)
    shapes["pair_mlp.layer1.b"] = (1,)
    for head in ("ee_mlp", "ce_mlp"):
        shapes[f"{head}.layer0.W"] = (d_h, d_h)
        shapes[f"{head}.layer0.b"] = (d_h,)
        shapes[f"{head}.layer1.W"] = (2, d_h)
        shapes[f"{head}.layer1.b"] = (2,)
    return shapes


@dataclass(frozen=True)
class ModelParams:
    """All model weights; any block absent from the params file is seeded.

    Speaker vectors for ids missing from speaker_table are generated on
    demand from the block seed for "speaker.<id>", so unseen speakers are
    deterministic too.
    """

    d_u: int
    d_s: int
    seed: int
    speaker_table: Mapping[int, np.ndarray]
    encoder_e: tuple[AttentionLayerParams, ...]
    encoder_c: tuple[AttentionLayerParams, ...]
    pair_mlp: MlpParams
    ee_mlp: MlpParams
    ce_mlp: MlpParams

    @property
    def d_h(self) -> int:
        return self.d_u + self.d_s

    def encoder_layers(self, space: str) -> tuple[AttentionLayerParams, ...]:
        if space == "E":
            return self.encoder_e
        if space == "C":
            return self.encoder_c
        raise ContractViolation(f"semantic space must be 'E' or 'C', got {space!r}")

    def speaker_vector(self, speaker_id: int) -> np.ndarray:
        vec = self.speaker_table.get(speaker_id)
        if vec is not None:
            return vec
        return seeded_init((self.d_s,), block_seed(self.seed, f"speaker.{speaker_id}"))

    @classmethod
    def materialize(
        cls,
        d_u: int,
        d_s: int,
        layers: int,
        seed: int,
        blocks: Mapping[str, np.ndarray] | None = None,
    ) -> "ModelParams":
        """Assemble params from named file blocks, seeding whatever is absent."""
        blocks = dict(blocks or {})
        shapes = _block_shapes(d_u, d_s, layers)

        speaker_table: dict[int, np.ndarray] = {}
        for name in list(blocks):
            if name.startswith("speaker."):
                raw = blocks.pop(name)
                sid_text = name.split(".", 1)[1]
                try:
                    sid = int(sid_text)
                except ValueError:
                    raise ConfigError(f"params block {name!r}: speaker id must be an integer")
                vec = np.asarray(raw, dtype=np.float64)
                if vec.shape != (d_s,):
                    raise ConfigError(
                        f"params block {name!r}: expected shape ({d_s},), got {vec.shape}"
                    )
                speaker_table[sid] = frozen(vec)

        unknown = set(blocks) - set(shapes)
        if unknown:
            raise ConfigError(f"unknown params blocks: {sorted(unknown)}")

        def tensor(name: str) -> np.ndarray:
            expected = shapes[name]
            if name in blocks:
                arr = np.asarray(blocks[name], dtype=np.float64)
                if arr.shape != expected:
                    raise ConfigError(
                        f"params block {name!r}: expected shape {expected}, got {arr.shape}"
                    )
                return ensure_finite(arr, f"params block {name!r}")
            return seeded_init(expected, block_seed(seed, name))

        def encoder(space: str) -> tuple[AttentionLayerParams, ...]:
            return tuple(
                AttentionLayerParams(
                    W=tensor(f"encoder.{space}.layer{layer}.W"),
                    a=tensor(f"encoder.{space}.layer{layer}.a"),
                )
                for layer in range(layers)
            )

        def mlp(prefix: str) -> MlpParams:
            return MlpParams(
                W0=tensor(f"{prefix}.layer0.W"),
                b0=tensor(f"{prefix}.layer0.b"),
                W1=tensor(f"{prefix}.layer1.W"),
                b1=tensor(f"{prefix}.layer1.b"),
            )

        return cls(
            d_u=d_u,
            d_s=d_s,
            seed=seed,
            speaker_table=speaker_table,
            encoder_e=encoder("E"),
            encoder_c=encoder("C"),
            pair_mlp=mlp("pair_mlp"),
            ee_mlp=mlp("ee_mlp"),
            ce_mlp=mlp("ce_mlp"),
        )
