"""Command-line entry point.

Subcommands: compress, decompress, estimate, evaluate, rank.
Exit codes: 0 ok, 2 usage, 3 input error, 4 model/bridge error,
5 corrupt stream. Output files are written whole-or-not-at-all
(write to a temp sibling, then rename).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import container as container_format
from .coder import decode_stream, encode_stream
from .corpus import MODE_ESTIMATED, MODES, evaluate_model, load_chunks
from .errors import (
    BridgeProtocolError,
    BridgeTransportError,
    ContainerFormatError,
    CorruptStreamError,
    InputError,
    ModelContractError,
    ModelMismatchError,
    TokenizerLossyError,
)
from .estimator import RATIO_CAP, nll_bits
from .models import ModelSpec
from .ranker import (
    AccuracyTable,
    correlation_report,
    load_reference_accuracies,
    load_reference_ratios,
    ratios_from_csv,
)
from .tokenizers import (
    TOKENIZER_BRIDGE,
    TOKENIZER_BYTE,
    BridgeTokenizer,
    ByteTokenizer,
    TokenStream,
)

log = logging.getLogger("lmac")

BRIDGE_ENDPOINT_ENV = "LMAC_BRIDGE"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_MODEL = 4
EXIT_CORRUPT = 5


def _parse_model_spec(text: str) -> ModelSpec:
    """Parse a model spec, applying the bridge endpoint override env var.

    The override redirects the connection only; the spec text (the model
    identity in containers and reports) is untouched.
    """
    spec = ModelSpec.parse(text)
    override = os.environ.get(BRIDGE_ENDPOINT_ENV)
    if spec.kind == "bridge" and override:
        spec.endpoint = override
    return spec


def _pick_tokenizer(spec: ModelSpec, choice: str):
    if choice == "byte":
        if spec.kind == "bridge":
            raise InputError("bridge models use the bridge tokenizer (their own vocabulary)")
        return ByteTokenizer()
    if choice == "bridge":
        if spec.kind != "bridge":
            raise InputError("the bridge tokenizer requires a bridge model")
        return BridgeTokenizer(spec.connection())
    # auto
    return BridgeTokenizer(spec.connection()) if spec.kind == "bridge" else ByteTokenizer()


def _read_input(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e


def _write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _write_text(path: Path, lines) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(path)


def cmd_compress(args) -> int:
    data = _read_input(args.input)
    spec = _parse_model_spec(args.model)
    try:
        tokenizer = _pick_tokenizer(spec, args.tokenizer)
        stream = tokenizer.tokenize(data)
        payload = encode_stream(spec.make(), stream.ids)
        doc = container_format.pack(
            container_format.Container(
                model_spec=spec.text,
                tokenizer_id=tokenizer.tokenizer_id,
                original_length=len(data),
                payload=payload,
            )
        )
    finally:
        spec.close()
    out = Path(args.out if args.out else args.input + ".lmac")
    _write_bytes(out, doc)
    log.info(
        "compressed %d bytes to %d payload bits (%s)", len(data), payload.bit_length, out
    )
    return EXIT_OK


def cmd_decompress(args) -> int:
    doc = container_format.unpack(_read_input(args.input))
    if args.model is not None and args.model != doc.model_spec:
        raise ModelMismatchError(
            f"container was written with model {doc.model_spec!r}, not {args.model!r}"
        )
    spec = _parse_model_spec(doc.model_spec)
    try:
        if doc.tokenizer_id == TOKENIZER_BYTE:
            tokenizer = ByteTokenizer()
            max_tokens = doc.original_length
        elif doc.tokenizer_id == TOKENIZER_BRIDGE:
            tokenizer = BridgeTokenizer(spec.connection())
            max_tokens = None
        else:
            raise ContainerFormatError(f"unknown tokenizer id {doc.tokenizer_id:#x}")
        model = spec.make()
        ids = decode_stream(model, doc.payload, max_tokens=max_tokens)
        data = tokenizer.detokenize(TokenStream(ids=ids, tokenizer_id=doc.tokenizer_id))
    finally:
        spec.close()
    if len(data) != doc.original_length:
        raise CorruptStreamError(
            f"decoded {len(data)} bytes, container promised {doc.original_length}"
        )
    out = Path(args.out if args.out else _strip_suffix(args.input))
    _write_bytes(out, data)
    log.info("restored %d bytes to %s", len(data), out)
    return EXIT_OK


def _strip_suffix(path: str) -> str:
    return path[:-5] if path.endswith(".lmac") else path + ".out"


def cmd_estimate(args) -> int:
    data = _read_input(args.input)
    if not data:
        raise InputError("cannot estimate an empty file")
    spec = _parse_model_spec(args.model)
    try:
        tokenizer = _pick_tokenizer(spec, args.tokenizer)
        stream = tokenizer.tokenize(data)
        report = nll_bits(spec.make(), stream.ids)
    finally:
        spec.close()
    est_ratio = min(8.0 * len(data) / report.total_bits, RATIO_CAP)
    base = Path(args.out)
    _write_text(base.with_suffix(".tsv"), report.tsv_lines())
    summary = [
        f"model\t{spec.text}",
        f"tokens\t{report.token_count}",
        f"total_bits\t{report.total_bits:.6f}",
        f"original_bits\t{8 * len(data)}",
        f"ratio\t{est_ratio:.6f}",
        "mode\testimated",
    ]
    if report.raw_total_bits is not None:
        summary.append(f"raw_total_bits\t{report.raw_total_bits:.6f}")
    _write_text(base.with_suffix(".txt"), summary)
    if args.figures:
        from .figures import nll_figure

        nll_figure(report, base.with_suffix(".png"))
    log.info("estimated %.1f bits for %d bytes (ratio %.4f)", report.total_bits, len(data), est_ratio)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    chunks = load_chunks(args.corpus, args.chunk_words, args.max_chunks)
    spec = _parse_model_spec(args.model)
    try:
        tokenizer = _pick_tokenizer(spec, args.tokenizer)
        report = evaluate_model(spec, chunks, mode=args.mode, tokenizer=tokenizer, jobs=args.jobs)
    finally:
        spec.close()
    base = Path(args.out)
    _write_text(base.with_suffix(".json"), [report.to_json()])
    _write_text(base.with_suffix(".txt"), report.summary_lines())
    if args.figures:
        from .figures import evaluation_figure

        evaluation_figure(report, base.with_suffix(".png"))
    log.info(
        "%s on %d chunks: ratio %.4f (%s)", spec.text, len(report.chunks), report.ratio, args.mode
    )
    return EXIT_OK


def cmd_rank(args) -> int:
    import json

    from .corpus import CompressionReport

    records = []
    for path in args.reports:
        records.append(CompressionReport.from_json_dict(json.loads(_read_input(path))))
    if args.ratios_csv:
        records.extend(ratios_from_csv(args.ratios_csv))
    if not records:
        records = load_reference_ratios()
    table = AccuracyTable.from_csv(args.accuracies) if args.accuracies else load_reference_accuracies()
    report = correlation_report(records, table)
    base = Path(args.out)
    _write_text(base.with_suffix(".json"), [report.to_json()])
    _write_text(base.with_suffix(".txt"), report.summary_lines())
    if args.figures:
        from .figures import ranking_figure

        ranking_figure(report, table, base.with_suffix(".png"))
    log.info("ranked %d models over %d tasks", len(report.models), len(report.tasks))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmac",
        description="Lossless text compression with autoregressive entropy models, "
        "and compression-ratio model evaluation.",
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model(p, required=True):
        p.add_argument(
            "--model",
            required=required,
            default=None,
            help="model spec: uniform | ngram:K | bridge:ENDPOINT "
            f"(${BRIDGE_ENDPOINT_ENV} overrides the bridge endpoint)",
        )

    def add_tokenizer(p):
        p.add_argument(
            "--tokenizer",
            choices=["auto", "byte", "bridge"],
            default="auto",
            help="byte-level or the bridge's native tokenizer (default: match the model)",
        )

    def add_figures(p):
        p.add_argument(
            "--no-figures",
            dest="figures",
            action="store_false",
            help="skip rendering the PNG figure next to the report",
        )

    p = sub.add_parser("compress", help="compress a file into a container")
    p.add_argument("input")
    add_model(p)
    add_tokenizer(p)
    p.add_argument("--out", default=None, help="output path (default: INPUT.lmac)")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="restore the original file from a container")
    p.add_argument("input")
    add_model(p, required=False)
    p.add_argument("--out", default=None, help="output path (default: INPUT without .lmac)")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("estimate", help="per-token NLL report without coding")
    p.add_argument("input")
    add_model(p)
    add_tokenizer(p)
    p.add_argument("--out", required=True, help="output base path (writes .tsv/.txt/.png)")
    add_figures(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", help="per-chunk compression sweep over a corpus")
    p.add_argument("corpus")
    add_model(p)
    add_tokenizer(p)
    p.add_argument("--mode", choices=list(MODES), default=MODE_ESTIMATED)
    p.add_argument("--chunk-words", type=int, default=200)
    p.add_argument("--max-chunks", type=int, default=10000)
    p.add_argument("--jobs", type=int, default=1, help="parallel chunk evaluation workers")
    p.add_argument("--out", required=True, help="output base path (writes .json/.txt/.png)")
    add_figures(p)
    p.set_defaults(func=_jobs_guard(cmd_evaluate))

    p = sub.add_parser("rank", help="rank models and correlate ratio with accuracy")
    p.add_argument("--reports", nargs="*", default=[], help="evaluation report JSON files")
    p.add_argument("--ratios-csv", default=None, help="model,ratio,source records")
    p.add_argument(
        "--accuracies",
        default=None,
        help="model,task,accuracy,source table (default: packaged reference table)",
    )
    p.add_argument("--out", required=True, help="output base path (writes .json/.txt/.png)")
    add_figures(p)
    p.set_defaults(func=cmd_rank)

    return parser


def _jobs_guard(func):
    def wrapped(args):
        if args.jobs < 1:
            raise InputError(f"--jobs must be at least 1, got {args.jobs}")
        return func(args)

    return wrapped


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (InputError, TokenizerLossyError, ContainerFormatError) as e:
        log.error("%s", e)
        return EXIT_INPUT
    except (ModelContractError, ModelMismatchError, BridgeTransportError, BridgeProtocolError) as e:
        log.error("%s", e)
        return EXIT_MODEL
    except CorruptStreamError as e:
        log.error("%s", e)
        return EXIT_CORRUPT


if __name__ == "__main__":
    sys.exit(main())
