"""Dataset exporter producing the convalign corpus JSON schema."""

from .encode import UtteranceEncoder
from .export import build_corpus, speaker_ids, write_corpus
from .readers import (
    READERS,
    DatasetFormatError,
    RawDialogue,
    RawTurn,
    read_ecf,
    read_reccon,
)

__all__ = [
    "DatasetFormatError",
    "READERS",
    "RawDialogue",
    "RawTurn",
    "UtteranceEncoder",
    "build_corpus",
    "read_ecf",
    "read_reccon",
    "speaker_ids",
    "write_corpus",
]
