"""Command-line entry point for the dataset exporter."""

from __future__ import annotations

import logging

import click

from .encode import UtteranceEncoder
from .export import build_corpus, write_corpus
from .readers import READERS, DatasetFormatError


@click.group()
def main() -> None:
    """Export raw conversation datasets to the corpus JSON schema."""


@main.command("export")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Raw annotation JSON file.")
@click.option("--format", "fmt", required=True, type=click.Choice(sorted(READERS)),
              help="Annotation layout of the dataset file.")
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True),
              help="Output corpus JSON path.")
@click.option("--model", default="roberta-base", show_default=True,
              help="Pretrained model name or local checkpoint directory.")
@click.option("--batch-size", default=16, show_default=True, type=click.IntRange(min=1),
              help="Utterances per inference batch.")
def export_cmd(dataset: str, fmt: str, out: str, model: str, batch_size: int) -> None:
    """Embed every utterance and write the corpus JSON."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    _quiet_transformers()
    try:
        dialogues = READERS[fmt](dataset)
    except DatasetFormatError as exc:
        raise click.ClickException(str(exc)) from exc
    try:
        encoder = UtteranceEncoder(model, batch_size=batch_size)
    except Exception as exc:
        raise click.ClickException(f"could not load model '{model}': {exc}") from exc
    corpus = build_corpus(dialogues, encoder)
    write_corpus(corpus, out)
    utterances = sum(len(c["utterances"]) for c in corpus["conversations"])
    pairs = sum(len(c["gold_pairs"]) for c in corpus["conversations"])
    click.echo(
        f"wrote {len(corpus['conversations'])} conversations "
        f"({utterances} utterances, {pairs} pairs, d_u={corpus['d_u']}) to {out}"
    )


def _quiet_transformers() -> None:
    """Silence hub progress bars and info chatter; warnings stay visible."""
    try:
        import transformers

        transformers.logging.set_verbosity_error()
        transformers.logging.disable_progress_bar()
    except Exception:
        pass


if __name__ == "__main__":
    main()
