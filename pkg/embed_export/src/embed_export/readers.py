"""Readers for raw conversation datasets.

Each reader normalizes one on-disk annotation format into RawDialogue
records: turns carry a 1-based position, a speaker name, the raw text, and
an optional emotion label, while emotion-cause pair annotations are resolved
from the dataset's own turn numbering to positions. Validation errors name
the dialogue and the offending reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class DatasetFormatError(ValueError):
    """Raised when a raw dataset file violates its declared format."""


@dataclass(frozen=True)
class RawTurn:
    position: int
    speaker: str
    text: str
    emotion_label: str | None = None

    def has_emotion(self) -> bool:
        """True when the annotated label marks this turn as emotional."""
        if self.emotion_label is None:
            return False
        return self.emotion_label.strip().lower() not in ("", "neutral")


@dataclass(frozen=True)
class RawDialogue:
    dialogue_id: str
    turns: tuple[RawTurn, ...]
    pairs: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        n = len(self.turns)
        for emo, cause in self.pairs:
            if not (1 <= emo <= n and 1 <= cause <= n):
                raise DatasetFormatError(
                    f"dialogue '{self.dialogue_id}': pair ({emo}, {cause}) "
                    f"references a turn outside 1..{n}"
                )


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DatasetFormatError(message)


def _load_json(path: str | Path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: not valid JSON ({exc})") from exc


def _unique_pairs(pairs: list[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(set(pairs)))


def read_reccon(path: str | Path) -> list[RawDialogue]:
    """Parse a RECCON-style annotation file.

    The file is a JSON object mapping each dialogue id to its turn list
    (optionally wrapped in a one-element list, as in the distributed
    annotation files). Every turn is an object with ``turn`` (1-based id),
    ``speaker``, ``utterance``, and optionally ``emotion`` plus an
    ``expanded emotion cause evidence`` list naming the turns that cause it.
    Evidence entries that are not integers (latent causes outside the
    dialogue) are skipped.
    """
    data = _load_json(path)
    _require(isinstance(data, dict), f"{path}: top level must be an object keyed by dialogue id")
    dialogues: list[RawDialogue] = []
    for did, body in data.items():
        raw_turns = body
        if isinstance(raw_turns, list) and raw_turns and isinstance(raw_turns[0], list):
            raw_turns = raw_turns[0]
        _require(
            isinstance(raw_turns, list),
            f"dialogue '{did}': expected a list of turns",
        )
        turns: list[RawTurn] = []
        id_to_pos: dict[int, int] = {}
        evidence: list[tuple[int, int]] = []
        for offset, item in enumerate(raw_turns):
            _require(isinstance(item, dict), f"dialogue '{did}': turn {offset + 1} is not an object")
            for key in ("speaker", "utterance"):
                _require(key in item, f"dialogue '{did}': turn {offset + 1} missing field '{key}'")
            pos = offset + 1
            turn_id = item.get("turn", pos)
            _require(
                isinstance(turn_id, int) and not isinstance(turn_id, bool),
                f"dialogue '{did}': turn {pos} has a non-integer 'turn' id",
            )
            _require(
                turn_id not in id_to_pos,
                f"dialogue '{did}': duplicate turn id {turn_id}",
            )
            id_to_pos[turn_id] = pos
            turns.append(
                RawTurn(
                    position=pos,
                    speaker=str(item["speaker"]),
                    text=str(item["utterance"]),
                    emotion_label=None if item.get("emotion") is None else str(item["emotion"]),
                )
            )
            for entry in item.get("expanded emotion cause evidence", []) or []:
                if isinstance(entry, bool) or not isinstance(entry, int):
                    continue
                evidence.append((turn_id, entry))
        pairs: list[tuple[int, int]] = []
        for emo_id, cause_id in evidence:
            _require(
                cause_id in id_to_pos,
                f"dialogue '{did}': cause evidence references unknown turn {cause_id}",
            )
            pairs.append((id_to_pos[emo_id], id_to_pos[cause_id]))
        dialogues.append(RawDialogue(str(did), tuple(turns), _unique_pairs(pairs)))
    return dialogues


def _ecf_ref(value, did: str) -> int:
    """Resolve an ECF pair element to its utterance id.

    Elements are either bare integers or strings with an integer prefix
    before the first underscore, such as ``"3_joy"`` on the emotion side or
    ``"2_<span text>"`` on the cause side.
    """
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, str):
        head = value.split("_", 1)[0]
        try:
            return int(head)
        except ValueError:
            pass
    raise DatasetFormatError(
        f"dialogue '{did}': pair element {value!r} has no integer utterance id"
    )


def read_ecf(path: str | Path) -> list[RawDialogue]:
    """Parse an ECF-style annotation file.

    The file is a JSON array (or an object with a ``conversations`` array)
    of conversations, each carrying ``conversation_ID``, a ``conversation``
    list of utterance objects (``utterance_ID``, ``speaker``, ``text``, and
    optionally ``emotion``), and an ``emotion-cause_pairs`` list.
    """
    data = _load_json(path)
    if isinstance(data, dict) and isinstance(data.get("conversations"), list):
        data = data["conversations"]
    _require(isinstance(data, list), f"{path}: top level must be an array of conversations")
    dialogues: list[RawDialogue] = []
    for index, item in enumerate(data):
        _require(isinstance(item, dict), f"conversation #{index} is not an object")
        did = str(item.get("conversation_ID", index))
        body = item.get("conversation")
        _require(isinstance(body, list), f"dialogue '{did}': missing 'conversation' array")
        turns: list[RawTurn] = []
        id_to_pos: dict[int, int] = {}
        for offset, turn in enumerate(body):
            _require(isinstance(turn, dict), f"dialogue '{did}': utterance #{offset + 1} is not an object")
            for key in ("speaker", "text"):
                _require(key in turn, f"dialogue '{did}': utterance #{offset + 1} missing field '{key}'")
            pos = offset + 1
            turn_id = turn.get("utterance_ID", pos)
            _require(
                isinstance(turn_id, int) and not isinstance(turn_id, bool),
                f"dialogue '{did}': utterance #{pos} has a non-integer 'utterance_ID'",
            )
            _require(turn_id not in id_to_pos, f"dialogue '{did}': duplicate utterance id {turn_id}")
            id_to_pos[turn_id] = pos
            turns.append(
                RawTurn(
                    position=pos,
                    speaker=str(turn["speaker"]),
                    text=str(turn["text"]),
                    emotion_label=None if turn.get("emotion") is None else str(turn["emotion"]),
                )
            )
        pairs: list[tuple[int, int]] = []
        for pair in item.get("emotion-cause_pairs", []) or []:
            _require(
                isinstance(pair, (list, tuple)) and len(pair) == 2,
                f"dialogue '{did}': each pair must be a two-element array",
            )
            emo_id = _ecf_ref(pair[0], did)
            cause_id = _ecf_ref(pair[1], did)
            for ref in (emo_id, cause_id):
                _require(
                    ref in id_to_pos,
                    f"dialogue '{did}': pair references unknown utterance {ref}",
                )
            pairs.append((id_to_pos[emo_id], id_to_pos[cause_id]))
        dialogues.append(RawDialogue(did, tuple(turns), _unique_pairs(pairs)))
    return dialogues


READERS = {"reccon": read_reccon, "ecf": read_ecf}
