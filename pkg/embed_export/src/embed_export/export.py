"""Assembly of the corpus JSON consumed by the convalign pipeline."""

from __future__ import annotations

import json
from pathlib import Path

from .encode import UtteranceEncoder
from .readers import RawDialogue


def speaker_ids(dialogue: RawDialogue) -> dict[str, int]:
    """Map speaker names to dense integer ids in order of first appearance.

    The mapping is per conversation, so the same name always gets the same
    id within a dialogue and ids run 0..k-1 without gaps.
    """
    mapping: dict[str, int] = {}
    for turn in dialogue.turns:
        if turn.speaker not in mapping:
            mapping[turn.speaker] = len(mapping)
    return mapping


def build_corpus(dialogues: list[RawDialogue], encoder: UtteranceEncoder) -> dict:
    """Encode every utterance and emit the corpus schema as a plain dict.

    Utterance order, speaker ids, gold pairs, and the emotion/cause flags
    are all derived from the annotations: the emotion flag is set for turns
    with a non-neutral emotion label or on the emotion side of a gold pair,
    and the cause flag for turns on the cause side of a gold pair.
    """
    texts: list[str] = []
    labels: list[str] = []
    for dialogue in dialogues:
        for turn in dialogue.turns:
            texts.append(turn.text)
            labels.append(f"dialogue '{dialogue.dialogue_id}' turn {turn.position}")
    embeddings = encoder.encode(texts, labels)

    conversations = []
    cursor = 0
    for dialogue in dialogues:
        ids = speaker_ids(dialogue)
        emotion_side = {emo for emo, _ in dialogue.pairs}
        cause_side = {cause for _, cause in dialogue.pairs}
        utterances = []
        for turn in dialogue.turns:
            utterances.append(
                {
                    "index": turn.position,
                    "speaker": ids[turn.speaker],
                    "embedding": embeddings[cursor].tolist(),
                    "emotion": int(turn.has_emotion() or turn.position in emotion_side),
                    "cause": int(turn.position in cause_side),
                    "text": turn.text,
                }
            )
            cursor += 1
        conversations.append(
            {
                "id": dialogue.dialogue_id,
                "utterances": utterances,
                "gold_pairs": [list(pair) for pair in dialogue.pairs],
            }
        )
    return {"d_u": encoder.hidden_size, "conversations": conversations}


def write_corpus(corpus: dict, out_path: str | Path) -> None:
    """Write the corpus with sorted keys and stable float text.

    The serialization matches the convalign output conventions, so exporting
    the same dataset twice with the same model yields identical bytes.
    """
    path = Path(out_path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(corpus, handle, indent=2, sort_keys=True)
        handle.write("\n")
