import json

import pytest

SAMPLE_TEXTS = [
    "Hello there, how are you today?",
    "I feel wonderful because the sun is finally out.",
    "That makes me happy too!",
    "Why were you so sad yesterday?",
    "My cat knocked the vase over and it broke.",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """Build a small randomly initialized checkpoint usable fully offline.

    The tokenizer is a byte-level BPE trained on a fixed text sample and the
    model is a two-layer transformer with the production hidden width of
    768, so the export path is exercised end to end without network access.
    """
    import torch
    from tokenizers import ByteLevelBPETokenizer
    from tokenizers.processors import RobertaProcessing
    from transformers import PreTrainedTokenizerFast, RobertaConfig, RobertaModel

    target = tmp_path_factory.mktemp("tiny-model")
    bpe = ByteLevelBPETokenizer()
    bpe.train_from_iterator(
        SAMPLE_TEXTS,
        vocab_size=400,
        min_frequency=1,
        special_tokens=["<s>", "<pad>", "</s>", "<unk>", "<mask>"],
    )
    bpe.post_processor = RobertaProcessing(
        sep=("</s>", bpe.token_to_id("</s>")),
        cls=("<s>", bpe.token_to_id("<s>")),
    )
    bpe.save(str(target / "tokenizer.json"))

    tokenizer = PreTrainedTokenizerFast(
        tokenizer_file=str(target / "tokenizer.json"),
        model_max_length=32,
        bos_token="<s>",
        eos_token="</s>",
        unk_token="<unk>",
        sep_token="</s>",
        cls_token="<s>",
        pad_token="<pad>",
        mask_token="<mask>",
    )
    tokenizer.save_pretrained(target)

    config = RobertaConfig(
        vocab_size=bpe.get_vocab_size(),
        hidden_size=768,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=256,
        max_position_embeddings=40,
        pad_token_id=1,
        bos_token_id=0,
        eos_token_id=2,
    )
    torch.manual_seed(0)
    RobertaModel(config).save_pretrained(target)
    return str(target)


@pytest.fixture(scope="session")
def encoder(tiny_model_dir):
    from embed_export import UtteranceEncoder

    return UtteranceEncoder(tiny_model_dir, batch_size=4)


def make_reccon_payload():
    """Two-dialogue RECCON-style annotation with one latent-cause marker."""
    return {
        "tr_1": [[
            {"turn": 1, "speaker": "A", "utterance": "Hello there, how are you today?",
             "emotion": "neutral"},
            {"turn": 2, "speaker": "B", "utterance": "I feel wonderful because the sun is finally out.",
             "emotion": "happiness",
             "expanded emotion cause evidence": [2, 1, "b"],
             "expanded emotion cause span": ["the sun is finally out"]},
            {"turn": 3, "speaker": "A", "utterance": "That makes me happy too!",
             "emotion": "happiness",
             "expanded emotion cause evidence": [2]},
        ]],
        "tr_2": [[
            {"turn": 1, "speaker": "Chandler", "utterance": "Why were you so sad yesterday?",
             "emotion": "neutral"},
            {"turn": 2, "speaker": "Joey", "utterance": "My cat knocked the vase over and it broke.",
             "emotion": "sadness",
             "expanded emotion cause evidence": [2]},
        ]],
    }


def make_ecf_payload():
    return [
        {
            "conversation_ID": 17,
            "conversation": [
                {"utterance_ID": 1, "speaker": "Monica", "text": "Hello there, how are you today?",
                 "emotion": "neutral"},
                {"utterance_ID": 2, "speaker": "Ross", "text": "That makes me happy too!",
                 "emotion": "joy"},
            ],
            "emotion-cause_pairs": [["2_joy", "1_how are you today"]],
        },
        {
            "conversation_ID": 18,
            "conversation": [
                {"utterance_ID": 1, "speaker": "Ross", "text": "My cat knocked the vase over and it broke.",
                 "emotion": "sadness"},
            ],
            "emotion-cause_pairs": [["1_sadness", 1]],
        },
    ]


@pytest.fixture()
def reccon_file(tmp_path):
    path = tmp_path / "reccon.json"
    path.write_text(json.dumps(make_reccon_payload()))
    return str(path)


@pytest.fixture()
def ecf_file(tmp_path):
    path = tmp_path / "ecf.json"
    path.write_text(json.dumps(make_ecf_payload()))
    return str(path)
