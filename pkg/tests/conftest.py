"""Shared fixtures and builders for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from convalign import ConversationRecord, HyperParams, ModelParams, Utterance, load_corpus

FIXTURES = Path(__file__).parent / "fixtures"


def make_conversation(cid, n, d_u, rng, speakers=None, gold=()):
    """Random conversation whose emotion/cause flags are derived from gold pairs."""
    if speakers is None:
        speakers = [int(x) for x in rng.randint(0, 3, n)]
    gold = frozenset((int(e), int(c)) for e, c in gold)
    emotions = {e for e, _ in gold}
    causes = {c for _, c in gold}
    utterances = tuple(
        Utterance(
            index=i,
            speaker_id=speakers[i - 1],
            embedding=rng.uniform(-1.0, 1.0, d_u),
            emotion_label=1 if i in emotions else 0,
            cause_label=1 if i in causes else 0,
        )
        for i in range(1, n + 1)
    )
    return ConversationRecord(conversation_id=cid, utterances=utterances, gold_pairs=gold)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def small_corpus():
    return load_corpus(FIXTURES / "corpus_small.json")


@pytest.fixture()
def hp():
    # small speaker dimension keeps the unit tests quick
    return HyperParams(d_s=6)


@pytest.fixture()
def params(hp, small_corpus):
    return ModelParams.materialize(
        d_u=small_corpus.d_u, d_s=hp.d_s, layers=hp.layers, seed=11
    )
