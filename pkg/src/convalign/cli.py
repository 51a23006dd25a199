"""Command-line pipeline: corpus/params/config IO and deterministic runs.

Per conversation the pipeline builds the graph, encodes both semantic
spaces, aligns them by entropic optimal transport, fuses scores, and
evaluates losses. Outputs are a pure function of (corpus bytes, params
bytes, config, seed): all results are computed in memory first, floats are
serialized at full round-trip precision, keys are sorted, and conversations
are processed and written in corpus order regardless of worker count.

Corpus JSON:
    {"d_u": int, "conversations": [{"id": str,
        "utterances": [{"index": int, "speaker": int, "embedding": [float],
                        "emotion": 0|1, "cause": 0|1, "text": str?}],
        "gold_pairs": [[e, c], ...]}]}

Params JSON maps named tensor blocks ("encoder.E.layer0.W",
"pair_mlp.layer0.b", "speaker.3", ...) to nested float arrays; any absent
block is materialized deterministically from the seed.
"""

from __future__ import annotations

import dataclasses
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence, TypeVar

import click
import numpy as np

from .align import TransportPlan, fgw_align
from .core import (
    ConfigError,
    ConversationRecord,
    Corpus,
    CorpusFormatError,
    EvalInputError,
    HyperParams,
    ModelParams,
    Utterance,
)
from .encoder import EncoderOutput, encode
from .evaluate import (
    EvalReport,
    binary_f1,
    evaluate_corpus,
    multi_cause_subset,
    score_pairs,
)
from .graph import ConversationGraph, build_graph
from .predict import LossReport, PairPredictionSet, losses, predict_pairs

OUTPUT_DIR_ENV = "CONVALIGN_OUT"

_T = TypeVar("_T")
_HP_FIELDS = {f.name for f in dataclasses.fields(HyperParams)}


# ---------------------------------------------------------------------------
# IO
# ---------------------------------------------------------------------------


def dump_json(payload: Any) -> str:
    """Canonical JSON: sorted keys, 2-space indent, trailing newline.

    Floats go through repr, which round-trips every IEEE double exactly.
    """
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return _is_int(value) or isinstance(value, float)


def _load_json(path: Path, what: str) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{what} file {path} is not valid JSON: {exc}") from None


def _utterance_from_obj(cid: str, pos: int, obj: Any) -> Utterance:
    where = f"conversation {cid!r}: utterance #{pos}"
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"{where} must be an object")
    for field in ("index", "speaker", "embedding", "emotion", "cause"):
        if field not in obj:
            raise CorpusFormatError(f"{where}: missing field {field!r}")
    if not _is_int(obj["index"]):
        raise CorpusFormatError(f"{where}: field 'index' must be an integer")
    if not _is_int(obj["speaker"]):
        raise CorpusFormatError(f"{where}: field 'speaker' must be an integer")
    embedding = obj["embedding"]
    if not isinstance(embedding, list) or not embedding or not all(
        _is_number(x) for x in embedding
    ):
        raise CorpusFormatError(
            f"{where}: field 'embedding' must be a non-empty array of numbers"
        )
    for field in ("emotion", "cause"):
        value = obj[field]
        if not _is_int(value) or value not in (0, 1):
            raise CorpusFormatError(f"{where}: field {field!r} must be 0 or 1")
    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        raise CorpusFormatError(f"{where}: field 'text' must be a string when present")
    return Utterance(
        index=obj["index"],
        speaker_id=obj["speaker"],
        embedding=np.asarray(embedding, dtype=np.float64),
        emotion_label=obj["emotion"],
        cause_label=obj["cause"],
        text=text,
    )


def _conversation_from_obj(pos: int, obj: Any) -> ConversationRecord:
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"conversation #{pos}: record must be an object")
    cid = obj.get("id")
    if not isinstance(cid, str) or not cid:
        raise CorpusFormatError(
            f"conversation #{pos}: field 'id' must be a non-empty string"
        )
    raw_utts = obj.get("utterances")
    if not isinstance(raw_utts, list) or not raw_utts:
        raise CorpusFormatError(
            f"conversation {cid!r}: field 'utterances' must be a non-empty array"
        )
    raw_pairs = obj.get("gold_pairs")
    if not isinstance(raw_pairs, list):
        raise CorpusFormatError(
            f"conversation {cid!r}: field 'gold_pairs' must be an array"
        )
    pairs = []
    for pair in raw_pairs:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(_is_int(x) for x in pair)
        ):
            raise CorpusFormatError(
                f"conversation {cid!r}: field 'gold_pairs' entries must be [e, c] integer pairs"
            )
        pairs.append((pair[0], pair[1]))
    utterances = [_utterance_from_obj(cid, k, u) for k, u in enumerate(raw_utts)]
    try:
        return ConversationRecord(
            conversation_id=cid, utterances=tuple(utterances), gold_pairs=frozenset(pairs)
        )
    except CorpusFormatError as exc:
        message = str(exc)
        if message.startswith("conversation"):
            raise
        raise CorpusFormatError(f"conversation {cid!r}: {message}") from None


def load_corpus(path: str | Path) -> Corpus:
    """Parse and validate a corpus file; errors name the conversation and field."""
    raw = _load_json(Path(path), "corpus")
    if not isinstance(raw, dict):
        raise CorpusFormatError(f"corpus file {path}: top level must be an object")
    d_u = raw.get("d_u")
    if not _is_int(d_u) or d_u < 1:
        raise CorpusFormatError(f"corpus file {path}: field 'd_u' must be a positive integer")
    raw_convs = raw.get("conversations")
    if not isinstance(raw_convs, list):
        raise CorpusFormatError(f"corpus file {path}: field 'conversations' must be an array")
    conversations = [_conversation_from_obj(k, c) for k, c in enumerate(raw_convs)]
    seen: set[str] = set()
    for conv in conversations:
        if conv.conversation_id in seen:
            raise CorpusFormatError(
                f"conversation {conv.conversation_id!r}: field 'id' is duplicated"
            )
        seen.add(conv.conversation_id)
    return Corpus(d_u=d_u, conversations=tuple(conversations))


def load_params_blocks(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a params file into named float64 tensors (shape checks happen
    in ModelParams.materialize)."""
    raw = _load_json(Path(path), "params")
    if not isinstance(raw, dict):
        raise ConfigError(f"params file {path}: top level must be an object")
    blocks: dict[str, np.ndarray] = {}
    for name, value in raw.items():
        try:
            arr = np.asarray(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise ConfigError(
                f"params file {path}: block {name!r} must be a nested numeric array"
            ) from None
        blocks[name] = arr
    return blocks


def load_config(path: str | Path) -> dict[str, Any]:
    """Parse a config file of hyperparameter overrides plus optional seed."""
    raw = _load_json(Path(path), "config")
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    allowed = _HP_FIELDS | {"seed"}
    for key, value in raw.items():
        if key not in allowed:
            raise ConfigError(f"config file {path}: unknown key {key!r}")
        if not _is_number(value):
            raise ConfigError(f"config file {path}: key {key!r} must be a number")
    return raw


# ---------------------------------------------------------------------------
# Run configuration and per-conversation computation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run: command, paths, hyperparameters, seed, workers."""

    command: str
    corpus_path: Path
    output_dir: Path
    hp: HyperParams
    seed: int
    params_path: Path | None = None
    threads: int = 1
    predictions_path: Path | None = None
    multi_cause_only: bool = False
    dump_encoders: bool = False

    def __post_init__(self) -> None:
        if self.command not in ("build-graph", "align", "predict", "eval", "pipeline"):
            raise ConfigError(f"unknown command {self.command!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


def resolve_hyperparams(
    config: Mapping[str, Any], overrides: Mapping[str, Any]
) -> HyperParams:
    """Merge (defaults < config file < explicit overrides) and re-validate."""
    merged: dict[str, Any] = {k: v for k, v in config.items() if k in _HP_FIELDS}
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return HyperParams(**merged)


@dataclass(frozen=True)
class ConversationResult:
    """Everything the pipeline computed for one conversation."""

    conv: ConversationRecord
    graph: ConversationGraph
    enc_e: EncoderOutput
    enc_c: EncoderOutput
    plan: TransportPlan
    preds: PairPredictionSet
    loss: LossReport


def process_conversation(
    conv: ConversationRecord, params: ModelParams, hp: HyperParams
) -> ConversationResult:
    """Run the full per-conversation chain: graph, dual encoders, transport
    alignment, fused pair scores, losses."""
    graph = build_graph(conv, params, hp)
    enc_e = encode(graph, params, "E")
    enc_c = encode(graph, params, "C")
    plan = fgw_align(enc_e.H, enc_c.H, enc_e.A_induced, enc_c.A_induced, hp)
    preds = predict_pairs(enc_e.H, enc_c.H, plan.T_tilde, params, hp)
    loss = losses(preds, plan.T_tilde, conv, hp)
    return ConversationResult(
        conv=conv,
        graph=graph,
        enc_e=enc_e,
        enc_c=enc_c,
        plan=plan,
        preds=preds,
        loss=loss,
    )


def _map_conversations(
    convs: Sequence[ConversationRecord],
    fn: Callable[[ConversationRecord], _T],
    threads: int,
) -> list[_T]:
    # ThreadPoolExecutor.map yields results in input order, so worker count
    # never changes output order
    if threads <= 1:
        return [fn(c) for c in convs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, convs))


# ---------------------------------------------------------------------------
# Artifact serialization
# ---------------------------------------------------------------------------

_SAFE_NAME = re.compile(r"[^A-Za-z0-9._-]")


def _file_name(cid: str) -> str:
    return _SAFE_NAME.sub("_", cid) + ".json"


def _file_names(convs: Sequence[ConversationRecord]) -> dict[str, str]:
    names: dict[str, str] = {}
    taken: set[str] = set()
    for conv in convs:
        name = _file_name(conv.conversation_id)
        if name in taken:
            raise ConfigError(
                f"conversation ids collide after filename sanitization: {name!r}"
            )
        taken.add(name)
        names[conv.conversation_id] = name
    return names


def _decision_list(decisions: Iterable[tuple[int, int]]) -> list[list[int]]:
    return [list(pair) for pair in sorted(decisions)]


def _graph_payload(cid: str, graph: ConversationGraph) -> dict[str, Any]:
    types = [
        [
            sorted(t.value for t in graph.edge_types.get((i, j), frozenset()))
            for j in range(graph.n)
        ]
        for i in range(graph.n)
    ]
    return {
        "id": cid,
        "n": graph.n,
        "node_features": graph.node_features.tolist(),
        "adjacency": graph.adjacency.tolist(),
        "edge_types": types,
    }


def _alignment_payload(cid: str, plan: TransportPlan) -> dict[str, Any]:
    return {
        "id": cid,
        "T": plan.T.tolist(),
        "T_tilde": plan.T_tilde.tolist(),
        "objective_trace": list(plan.objective_trace),
        "iterations_used": plan.iterations_used,
    }


def _encoder_payload(cid: str, enc_e: EncoderOutput, enc_c: EncoderOutput) -> dict[str, Any]:
    return {
        "id": cid,
        "H_E": enc_e.H.tolist(),
        "A_E": enc_e.A_induced.tolist(),
        "H_C": enc_c.H.tolist(),
        "A_C": enc_c.A_induced.tolist(),
    }


def _prediction_payload(
    cid: str, preds: PairPredictionSet, loss: LossReport
) -> dict[str, Any]:
    return {
        "id": cid,
        "s": preds.s.tolist(),
        "y_hat": preds.y_hat.tolist(),
        "decisions": _decision_list(preds.decisions),
        "ee_probs": preds.ee_probs.tolist(),
        "ce_probs": preds.ce_probs.tolist(),
        "losses": loss.as_dict(),
    }


def _pipeline_payload(result: ConversationResult) -> dict[str, Any]:
    payload = _prediction_payload(result.conv.conversation_id, result.preds, result.loss)
    payload.update(
        {
            "n": result.conv.n,
            "adjacency": result.graph.adjacency.tolist(),
            "T": result.plan.T.tolist(),
            "T_tilde": result.plan.T_tilde.tolist(),
            "objective_trace": list(result.plan.objective_trace),
            "iterations_used": result.plan.iterations_used,
        }
    )
    return payload


def _write_outputs(outputs: Sequence[tuple[Path, str]]) -> None:
    # everything is rendered before the first write; if a write still fails,
    # remove whatever was created so no partial run is left behind
    created: list[Path] = []
    try:
        for path, text in outputs:
            path.parent.mkdir(parents=True, exist_ok=True)
            created.append(path)
            path.write_text(text, encoding="utf-8")
    except BaseException:
        for path in created:
            path.unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# Prediction-file loading for eval
# ---------------------------------------------------------------------------


def _pairs_from_json(cid: str, raw: Any) -> set[tuple[int, int]]:
    if not isinstance(raw, list):
        raise EvalInputError(f"predictions for {cid!r}: 'decisions' must be an array")
    pairs: set[tuple[int, int]] = set()
    for pair in raw:
        if not isinstance(pair, list) or len(pair) != 2 or not all(_is_int(x) for x in pair):
            raise EvalInputError(
                f"predictions for {cid!r}: decisions entries must be [e, c] integer pairs"
            )
        pairs.add((pair[0], pair[1]))
    return pairs


def load_decisions(
    path: str | Path,
) -> tuple[dict[str, set[tuple[int, int]]], dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Read pair decisions for eval, either from a directory of
    per-conversation JSON files (as written by predict/pipeline) or from a
    single JSON object mapping conversation id to a pair list.

    Also returns whatever ee_probs/ce_probs the files carry, keyed by id.
    """
    path = Path(path)
    decisions: dict[str, set[tuple[int, int]]] = {}
    ee_probs: dict[str, np.ndarray] = {}
    ce_probs: dict[str, np.ndarray] = {}
    if path.is_dir():
        for file in sorted(path.glob("*.json")):
            raw = _load_json(file, "predictions")
            if not isinstance(raw, dict) or "id" not in raw or "decisions" not in raw:
                raise EvalInputError(
                    f"predictions file {file} must be an object with 'id' and 'decisions'"
                )
            cid = raw["id"]
            if not isinstance(cid, str) or cid in decisions:
                raise EvalInputError(f"predictions file {file}: bad or duplicate id")
            decisions[cid] = _pairs_from_json(cid, raw["decisions"])
            for key, target in (("ee_probs", ee_probs), ("ce_probs", ce_probs)):
                if key in raw:
                    target[cid] = np.asarray(raw[key], dtype=np.float64)
    else:
        raw = _load_json(path, "predictions")
        if not isinstance(raw, dict):
            raise EvalInputError(
                f"predictions file {path} must map conversation ids to pair lists"
            )
        for cid, value in raw.items():
            decisions[cid] = _pairs_from_json(cid, value)
    return decisions, ee_probs, ce_probs


# ---------------------------------------------------------------------------
# Command execution
# ---------------------------------------------------------------------------


def _head_f1_from_files(
    corpus: Corpus,
    probs: Mapping[str, np.ndarray],
    flags: Callable[[ConversationRecord], np.ndarray],
) -> float:
    # head F1 is only reported when every evaluated conversation has
    # well-formed (n, 2) probability rows in the prediction files
    ids = [c.conversation_id for c in corpus.conversations]
    if not ids or any(cid not in probs for cid in ids):
        return 0.0
    for conv in corpus.conversations:
        if probs[conv.conversation_id].shape != (conv.n, 2):
            raise EvalInputError(
                f"predictions for {conv.conversation_id!r}: probability rows must "
                f"have shape ({conv.n}, 2)"
            )
    predicted = np.concatenate(
        [(probs[cid][:, 1] > 0.5).astype(np.int64) for cid in ids]
    )
    gold = np.concatenate([flags(c) for c in corpus.conversations])
    return binary_f1(predicted, gold)


def _eval_from_files(config: RunConfig, corpus: Corpus) -> EvalReport:
    decisions_all, ee_probs, ce_probs = load_decisions(config.predictions_path)
    gold = {c.conversation_id: c.gold_pairs for c in corpus.conversations}
    if config.multi_cause_only:
        # the prediction set may cover the full corpus; keep the subset's ids
        decisions = {cid: decisions_all[cid] for cid in gold if cid in decisions_all}
    else:
        decisions = decisions_all
    ee_f1 = _head_f1_from_files(corpus, ee_probs, ConversationRecord.emotion_flags)
    ce_f1 = _head_f1_from_files(corpus, ce_probs, ConversationRecord.cause_flags)
    return score_pairs(decisions, gold, ee_f1=ee_f1, ce_f1=ce_f1)


def _metric_table(report: EvalReport) -> str:
    rows = [
        ("metric", "P", "R", "F1"),
        ("ecpec", f"{report.precision:.4f}", f"{report.recall:.4f}", f"{report.f1:.4f}"),
        ("ee", "-", "-", f"{report.ee_f1:.4f}"),
        ("ce", "-", "-", f"{report.ce_f1:.4f}"),
    ]
    widths = [max(len(row[k]) for row in rows) for k in range(4)]
    return "\n".join(
        "  ".join(cell.rjust(widths[k]) for k, cell in enumerate(row)) for row in rows
    )


def run_pipeline(config: RunConfig) -> EvalReport | None:
    """Execute one command; returns the EvalReport for eval/pipeline runs."""
    if not config.corpus_path.is_file():
        raise ConfigError(f"corpus file not found: {config.corpus_path}")
    corpus = load_corpus(config.corpus_path)
    blocks = None
    if config.params_path is not None:
        if not config.params_path.is_file():
            raise ConfigError(f"params file not found: {config.params_path}")
        blocks = load_params_blocks(config.params_path)
    hp = config.hp
    params = ModelParams.materialize(corpus.d_u, hp.d_s, hp.layers, config.seed, blocks)

    if config.command == "eval" and config.multi_cause_only:
        corpus = multi_cause_subset(corpus)
    convs = corpus.conversations
    names = _file_names(convs)
    out = config.output_dir

    if config.command == "build-graph":
        graphs = _map_conversations(
            convs, lambda c: build_graph(c, params, hp), config.threads
        )
        _write_outputs(
            [
                (
                    out / "graphs" / names[c.conversation_id],
                    dump_json(_graph_payload(c.conversation_id, g)),
                )
                for c, g in zip(convs, graphs)
            ]
        )
        return None

    if config.command == "eval" and config.predictions_path is not None:
        report = _eval_from_files(config, corpus)
        _write_outputs([(out / "report.json", dump_json(report.as_dict()))])
        return report

    results = _map_conversations(
        convs, lambda c: process_conversation(c, params, hp), config.threads
    )

    if config.command == "align":
        outputs = [
            (
                out / "alignments" / names[r.conv.conversation_id],
                dump_json(_alignment_payload(r.conv.conversation_id, r.plan)),
            )
            for r in results
        ]
        if config.dump_encoders:
            outputs.extend(
                (
                    out / "encoders" / names[r.conv.conversation_id],
                    dump_json(
                        _encoder_payload(r.conv.conversation_id, r.enc_e, r.enc_c)
                    ),
                )
                for r in results
            )
        _write_outputs(outputs)
        return None

    if config.command == "predict":
        _write_outputs(
            [
                (
                    out / "predictions" / names[r.conv.conversation_id],
                    dump_json(
                        _prediction_payload(r.conv.conversation_id, r.preds, r.loss)
                    ),
                )
                for r in results
            ]
        )
        return None

    report = evaluate_corpus(
        corpus, {r.conv.conversation_id: r.preds for r in results}
    )
    outputs: list[tuple[Path, str]] = []
    if config.command == "pipeline":
        outputs.extend(
            (
                out / "conversations" / names[r.conv.conversation_id],
                dump_json(_pipeline_payload(r)),
            )
            for r in results
        )
    outputs.append((out / "report.json", dump_json(report.as_dict())))
    _write_outputs(outputs)
    return report


# ---------------------------------------------------------------------------
# Click wiring
# ---------------------------------------------------------------------------


def _common_options(fn: Callable) -> Callable:
    options = [
        click.option(
            "--corpus",
            "corpus_path",
            required=True,
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="Corpus JSON file.",
        ),
        click.option(
            "--params",
            "params_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            default=None,
            help="Params JSON file; absent blocks are seeded.",
        ),
        click.option(
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            default=None,
            help="Config JSON file with hyperparameter overrides and seed.",
        ),
        click.option(
            "--out",
            "output_dir",
            type=click.Path(file_okay=False, path_type=Path),
            envvar=OUTPUT_DIR_ENV,
            default="out",
            show_default=True,
            help=f"Output directory (env {OUTPUT_DIR_ENV}).",
        ),
        click.option("--seed", type=int, default=None, help="Parameter seed."),
        click.option(
            "--threads",
            type=click.IntRange(min=1),
            default=1,
            show_default=True,
            help="Worker threads; output is identical for any value.",
        ),
        click.option("--alpha", type=float, default=None, help="Attribute/structure trade-off."),
        click.option("--beta", type=float, default=None, help="Global/local fusion weight."),
        click.option("--epsilon", type=float, default=None, help="Entropy regularization."),
        click.option("--window", type=int, default=None, help="Local context window."),
        click.option("--tau-s", "tau_s", type=float, default=None, help="Similarity threshold."),
        click.option("--tau-e", "tau_e", type=float, default=None, help="Temporal decay constant."),
        click.option("--tau-r", "tau_r", type=float, default=None, help="Row-softmax temperature."),
        click.option(
            "--threshold",
            "decision_threshold",
            type=float,
            default=None,
            help="Pair decision cutoff.",
        ),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_config(command: str, kwargs: dict[str, Any]) -> RunConfig:
    config_path = kwargs.pop("config_path")
    file_config = load_config(config_path) if config_path is not None else {}
    seed = kwargs.pop("seed")
    if seed is None:
        seed = int(file_config.get("seed", 0))
    overrides = {
        name: kwargs.pop(name)
        for name in (
            "alpha",
            "beta",
            "epsilon",
            "window",
            "tau_s",
            "tau_e",
            "tau_r",
            "decision_threshold",
        )
    }
    hp = resolve_hyperparams(file_config, overrides)
    return RunConfig(command=command, hp=hp, seed=seed, **kwargs)


def _run(command: str, **kwargs: Any) -> EvalReport | None:
    try:
        config = _build_config(command, kwargs)
        return run_pipeline(config)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None


@click.group()
def main() -> None:
    """Deterministic emotion-cause pair pipeline over conversation embeddings."""


@main.command("build-graph")
@_common_options
def build_graph_cmd(**kwargs: Any) -> None:
    """Write the conversation graph for every conversation."""
    _run("build-graph", **kwargs)
    click.echo(f"wrote graphs under {kwargs['output_dir']}")


@main.command("align")
@_common_options
@click.option(
    "--dump-encoders",
    is_flag=True,
    help="Also write per-conversation encoder outputs (H and induced adjacency per space).",
)
def align_cmd(**kwargs: Any) -> None:
    """Write the transport plan for every conversation."""
    _run("align", **kwargs)
    click.echo(f"wrote alignments under {kwargs['output_dir']}")


@main.command("predict")
@_common_options
def predict_cmd(**kwargs: Any) -> None:
    """Write scores, decisions, and losses for every conversation."""
    _run("predict", **kwargs)
    click.echo(f"wrote predictions under {kwargs['output_dir']}")


@main.command("eval")
@_common_options
@click.option(
    "--predictions",
    "predictions_path",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="Existing predictions (directory of per-conversation JSON, or one JSON map); omit to run the pipeline.",
)
@click.option(
    "--multi-cause-only",
    is_flag=True,
    help="Evaluate only conversations where some emotion has 2+ gold causes.",
)
@click.option("--table", is_flag=True, help="Print a plain-text metric table instead of JSON.")
def eval_cmd(table: bool, **kwargs: Any) -> None:
    """Score pair decisions against gold pairs and write report.json."""
    report = _run("eval", **kwargs)
    assert report is not None
    if table:
        click.echo(_metric_table(report))
    else:
        click.echo(dump_json(report.as_dict()), nl=False)


@main.command("pipeline")
@_common_options
def pipeline_cmd(**kwargs: Any) -> None:
    """Run the full chain and write per-conversation results plus report.json."""
    report = _run("pipeline", **kwargs)
    assert report is not None
    click.echo(dump_json(report.as_dict()), nl=False)


if __name__ == "__main__":
    main()
