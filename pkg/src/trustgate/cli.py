"""Command-line entry points.

    trustgate serve     --config FILE
    trustgate decide    REQUEST.json [--config FILE]
    trustgate score     REQUEST.json [--config FILE]
    trustgate gen-data  --seed S --count N --mismatch-rate R --out DIR
    trustgate eval      SAMPLES.jsonl [--corpus FILE] [--threshold T]
                        [--csv FILE] [--json]
    trustgate encode    --group G --level L --access-type T --bond B --consent C
    trustgate decode    HEX

Exit codes: 0 success, 1 usage error, 2 validation error. `decide` and
`score` print exactly the JSON the HTTP API returns.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, build_engine, config_to_json_dict, load_config
from .datasynth import (
    generate_attributes,
    generate_labeled_dataset,
    golden_request_dict,
    read_corpus,
    read_samples_jsonl,
    write_attributes_csv,
    write_corpus,
    write_samples_jsonl,
)
from .encoding import (
    ComponentFields,
    EncodingError,
    decode_component,
    encode_component,
    split_context_array,
)
from .evaluation import evaluate, report_to_csv, report_to_json_dict, report_to_text
from .scoring import ScoringError
from .validation import ValidationError, validate_decide_body, validate_score_body
from .wire import decision_to_wire, render, scores_to_wire

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="trustgate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="JSON config file")

    for name, help_text in (
        ("decide", "evaluate a request file and print the decision"),
        ("score", "score a request file without deciding"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("file", help="JSON request body")
        cmd.add_argument("--config", help="JSON config file")

    gen = sub.add_parser("gen-data", help="generate a seeded dataset directory")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--count", type=int, required=True, help="number of labeled samples")
    gen.add_argument("--mismatch-rate", type=float, default=0.5)
    gen.add_argument("--out", required=True, help="output directory")

    ev = sub.add_parser("eval", help="run the misuse-detection evaluation")
    ev.add_argument("dataset", help="samples JSONL file")
    ev.add_argument("--corpus", help="corpus file (default: corpus.txt next to the dataset)")
    ev.add_argument("--threshold", type=float, default=0.7)
    ev.add_argument("--csv", help="also write the metrics CSV here")
    ev.add_argument("--json", action="store_true", help="print machine-readable results")

    enc = sub.add_parser("encode", help="encode component fields to 10 hex digits")
    enc.add_argument("--group", type=int, required=True)
    enc.add_argument("--level", type=int, required=True)
    enc.add_argument("--access-type", type=int, required=True)
    enc.add_argument("--bond", type=int, required=True, help="bond bucket 0-255")
    enc.add_argument("--consent", type=int, required=True, help="0 or 1")

    dec = sub.add_parser("decode", help="decode a 10-digit component or 32-digit context array")
    dec.add_argument("hex", help="uppercase hex string")

    return parser


def _load_request_file(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ValidationError("file", f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError("file", f"{path} is not valid JSON: {exc}")


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
    return EXIT_OK


def _cmd_decide(args) -> int:
    config = load_config(args.config)
    engine = build_engine(config)
    raw = _load_request_file(args.file)
    body = validate_decide_body(raw, engine.scoring_config, engine.thresholds, engine.resources)
    thresholds = body.thresholds or engine.thresholds
    decision = engine.evaluate(
        body.request, resources=body.resources, scoring_config=body.scoring, thresholds=thresholds
    )
    sys.stdout.write(render(decision_to_wire(decision, thresholds.ct)))
    return EXIT_OK


def _cmd_score(args) -> int:
    config = load_config(args.config)
    engine = build_engine(config)
    raw = _load_request_file(args.file)
    body = validate_score_body(raw, engine.scoring_config)
    scores = engine.score(
        body.triple, list(body.history), body.candidate_report, body.checks,
        scoring_config=body.scoring,
    )
    sys.stdout.write(render(scores_to_wire(scores, engine.thresholds.ct)))
    return EXIT_OK


def _cmd_gen_data(args) -> int:
    if args.count < 0:
        raise ValidationError("count", "must be >= 0", "range")
    if not 0.0 <= args.mismatch_rate <= 1.0:
        raise ValidationError("mismatch-rate", "must be in [0, 1]", "range")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dataset = generate_labeled_dataset(args.seed, args.count, args.mismatch_rate)
    write_samples_jsonl(dataset.samples, out / "samples.jsonl")
    write_corpus(dataset.corpus, out / "corpus.txt")
    write_attributes_csv(generate_attributes(args.seed, args.count), out / "attributes.csv")
    (out / "golden_request.json").write_text(
        json.dumps(golden_request_dict(args.seed), indent=2, sort_keys=True) + "\n", "utf-8"
    )
    from .config import ServiceConfig

    config_dict = config_to_json_dict(ServiceConfig())
    config_dict["corpus_path"] = str(out / "corpus.txt")
    config_dict["audit_log_path"] = str(out / "audit.jsonl")
    (out / "config.json").write_text(json.dumps(config_dict, indent=2, sort_keys=True) + "\n", "utf-8")
    sys.stdout.write(
        f"wrote {len(dataset.samples)} samples, {len(dataset.corpus)} corpus lines to {out}\n"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    dataset_path = Path(args.dataset)
    corpus_path = Path(args.corpus) if args.corpus else dataset_path.parent / "corpus.txt"
    try:
        samples = read_samples_jsonl(dataset_path)
        corpus = read_corpus(corpus_path)
    except OSError as exc:
        raise ValidationError("file", str(exc))
    except (KeyError, json.JSONDecodeError) as exc:
        raise ValidationError("dataset", f"malformed dataset: {exc}")
    if not samples:
        raise ValidationError("dataset", "no samples in dataset", "range")
    report = evaluate(samples, corpus, threshold=args.threshold)
    if args.csv:
        Path(args.csv).write_text(report_to_csv(report), "utf-8")
    if args.json:
        sys.stdout.write(render(report_to_json_dict(report)))
    else:
        sys.stdout.write(report_to_text(report))
    return EXIT_OK


def _cmd_encode(args) -> int:
    fields = ComponentFields(
        group=args.group,
        level=args.level,
        access_type=args.access_type,
        bond_bucket=args.bond,
        consent=args.consent,
    )
    sys.stdout.write(encode_component(fields) + "\n")
    return EXIT_OK


def _cmd_decode(args) -> int:
    text = args.hex.strip()
    if len(text) == 10:
        fields = decode_component(text)
        payload = {
            "group": fields.group,
            "level": fields.level,
            "access_type": fields.access_type,
            "bond_bucket": fields.bond_bucket,
            "consent": fields.consent,
        }
    elif len(text) == 32:
        user_enc, device_enc, output_enc, ct_bucket = split_context_array(text)
        payload = {
            "user": user_enc,
            "device": device_enc,
            "output": output_enc,
            "ct_bucket": ct_bucket,
        }
    else:
        raise ValidationError("hex", f"expected 10 or 32 hex digits, got {len(text)}", "range")
    sys.stdout.write(render(payload))
    return EXIT_OK


_COMMANDS = {
    "serve": _cmd_serve,
    "decide": _cmd_decide,
    "score": _cmd_score,
    "gen-data": _cmd_gen_data,
    "eval": _cmd_eval,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, ConfigError, ScoringError, EncodingError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
