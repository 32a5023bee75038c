"""Command-line entry point.

Exit codes: 0 success, 2 runtime failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import MODES, AppConfig, load_config
from .core import DEFAULT_LABEL_MAP, Claim, LabelMap
from .errors import AletheiaError, ConfigError
from .harness import (
    compute_metrics,
    load_dataset,
    read_reports,
    render_table,
    run_batch,
    write_reports,
)
from .pipeline import Pipeline, transport_from_config
from .providers import ChatRequest, Message, ProviderSession
from .providers.cassette import Cassette
from .providers.types import is_http_url

EXIT_OK = 0
EXIT_RUNTIME = 2
EXIT_USAGE = 64

log = logging.getLogger("aletheia")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--credibility-threshold", type=float)
    p.add_argument("--top-k", type=int)
    p.add_argument("--blacklist", metavar="FILE")
    p.add_argument("--allowlist", metavar="FILE")
    p.add_argument("--max-subclaims", type=int)
    p.add_argument("--per-query-limit", type=int)
    p.add_argument("--max-extract-chars", type=int)
    p.add_argument("--claim-parallelism", type=int)
    p.add_argument("--template-dir")
    p.add_argument("--label-map", metavar="FILE", help="JSON with true_labels/false_labels")
    cassette = p.add_mutually_exclusive_group()
    cassette.add_argument("--replay", metavar="CASSETTE")
    cassette.add_argument("--record", metavar="CASSETTE")


_FLAG_FIELDS = (
    "mode", "seed", "alpha", "credibility_threshold", "top_k", "blacklist", "allowlist",
    "max_subclaims", "per_query_limit", "max_extract_chars", "claim_parallelism",
    "template_dir", "label_map", "replay", "record",
)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aletheia", description="Evidence-grounded multimodal claim verification.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    v = sub.add_parser("verify", help="verify one claim and print the report")
    v.add_argument("--claim-text")
    v.add_argument("--image", help="image path or URL")
    v.add_argument("--claim-file", help="JSON object with id, text, image")
    v.add_argument("--id", default="cli", help="claim id when using --claim-text/--image")
    v.add_argument("--trace", metavar="PATH", help="write the run log JSON here")
    _add_run_options(v)

    b = sub.add_parser("batch", help="run a dataset and compute metrics")
    b.add_argument("--dataset")
    b.add_argument("--out")
    b.add_argument("--trace", action="store_true", help="write OUT/trace.jsonl")
    _add_run_options(b)

    e = sub.add_parser("eval", help="compute metrics from an existing reports.jsonl")
    e.add_argument("--reports")
    e.add_argument("--dataset")
    e.add_argument("--out", help="metrics.json path")
    e.add_argument("--label-map", metavar="FILE")

    pr = sub.add_parser("providers", help="provider utilities")
    prsub = pr.add_subparsers(dest="action", parser_class=_Parser)
    check = prsub.add_parser("check", help="probe every configured provider")
    check.add_argument("--config")
    check.add_argument("--replay", metavar="CASSETTE")
    return parser


def config_from_args(args: argparse.Namespace) -> AppConfig:
    overrides = {name: getattr(args, name, None) for name in _FLAG_FIELDS}
    if getattr(args, "trace", None):
        overrides["trace"] = True
    return load_config(getattr(args, "config", None), overrides)


def _label_map(path: str | None) -> LabelMap:
    return LabelMap.from_json(path) if path else DEFAULT_LABEL_MAP


def _claim_from_args(args) -> Claim:
    if args.claim_file:
        path = Path(args.claim_file)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read claim file: {exc}") from exc
        image = obj.get("image")
        if image and not is_http_url(image) and not Path(image).is_absolute():
            image = str(path.parent / image)
        return Claim(id=str(obj.get("id", path.stem)), text=obj.get("text") or "", image=image)
    if not (args.claim_text or args.image):
        raise UsageError("give --claim-text and/or --image, or --claim-file")
    return Claim(id=args.id, text=args.claim_text or "", image=args.image)


def cmd_verify(args) -> int:
    cfg = config_from_args(args)
    claim = _claim_from_args(args)
    with transport_from_config(cfg) as transport:
        pipeline = Pipeline(transport, cfg, label_map=_label_map(cfg.label_map))
        report, trace = pipeline.verify_claim(claim)
    print(report.to_json(indent=2))
    if args.trace:
        run_log = trace.to_dict()
        run_log["transcript"] = [{"role": m.role, "text": m.text} for m in report.transcript]
        Path(args.trace).write_text(json.dumps(run_log, indent=2, ensure_ascii=False) + "\n", "utf-8")
    return EXIT_OK


def cmd_batch(args) -> int:
    if not args.dataset or not args.out:
        raise UsageError("batch needs --dataset and --out")
    cfg = config_from_args(args)
    label_map = _label_map(cfg.label_map)
    records = load_dataset(args.dataset, label_map)
    if not records:
        raise UsageError(f"dataset {args.dataset} is empty")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traces = []
    with transport_from_config(cfg) as transport:
        pipeline = Pipeline(transport, cfg, label_map=label_map)
        reports = run_batch(
            records, pipeline, cfg.mode, cfg.seed,
            on_trace=traces.append if cfg.trace else None,
        )
    write_reports(reports, out / "reports.jsonl")
    metrics = compute_metrics(reports, records)
    (out / "metrics.json").write_text(json.dumps(metrics.to_dict(), indent=2) + "\n", "utf-8")
    if cfg.trace:
        with open(out / "trace.jsonl", "w", encoding="utf-8") as fh:
            for t in traces:
                fh.write(json.dumps(t.to_dict(), ensure_ascii=False) + "\n")
    print(render_table(metrics))
    return EXIT_OK


def cmd_eval(args) -> int:
    if not args.reports or not args.dataset:
        raise UsageError("eval needs --reports and --dataset")
    records = load_dataset(args.dataset, _label_map(args.label_map))
    metrics = compute_metrics(read_reports(args.reports), records)
    if args.out:
        Path(args.out).write_text(json.dumps(metrics.to_dict(), indent=2) + "\n", "utf-8")
    print(render_table(metrics))
    return EXIT_OK


def cmd_providers_check(args) -> int:
    cfg = load_config(args.config, {"replay": args.replay})
    if cfg.replay:
        cassette = Cassette.load(cfg.replay)
        counts: dict[str, int] = {}
        for entry in cassette.entries.values():
            counts[entry["service"]] = counts.get(entry["service"], 0) + 1
        for service, n in sorted(counts.items()):
            print(f"{service:13} replay  {n} recorded exchange(s)")
        return EXIT_OK
    if not cfg.endpoints():
        print("no provider endpoints configured (set ALETHEIA_*_URL or the config 'providers' section)")
        return EXIT_RUNTIME
    probes = {
        "chat": lambda s: s.chat(ChatRequest((Message.user("ping"),)), bucket="verify"),
        "embed": lambda s: s.embed(["ping"]),
        "search_text": lambda s: s.search_text("ping", 1),
    }
    ok = True
    with transport_from_config(cfg) as transport:
        session = ProviderSession(transport)
        for service in cfg.endpoints():
            probe = probes.get(service)
            if probe is None:
                print(f"{service:13} configured (no probe)")
                continue
            try:
                probe(session)
                print(f"{service:13} ok")
            except AletheiaError as exc:
                ok = False
                print(f"{service:13} FAILED  {exc}")
    return EXIT_OK if ok else EXIT_RUNTIME


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {"verify": cmd_verify, "batch": cmd_batch, "eval": cmd_eval}
    try:
        if args.command in handlers:
            return handlers[args.command](args)
        if args.command == "providers" and args.action == "check":
            return cmd_providers_check(args)
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    except (UsageError, ConfigError) as exc:
        print(f"aletheia: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AletheiaError, ValueError, OSError) as exc:
        print(f"aletheia: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
