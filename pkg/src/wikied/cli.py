"""Command-line entry point: ``wikied build-snapshot | disambiguate | evaluate``.

Exit codes: 0 success, 1 internal error, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import FrozenSet, Iterator, Optional, Sequence, TextIO

from .errors import WikiEDError
from .evaluation import evaluate, load_corpus
from .ingest import build_snapshot_from_dump
from .linker import LinkerConfig, explain, format_explanation, link_corpus
from .scoring import MODULES, ScorerConfig, load_infobox_rules
from .store import load_snapshot

log = logging.getLogger("wikied")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    snapshot_path: str
    input_path: str
    output_path: Optional[str] = None
    corpus_format: str = "native"
    enabled_modules: FrozenSet[str] = frozenset(MODULES)
    level: str = "both"
    nil_threshold: float = 0.05
    infobox_rules_path: Optional[str] = None
    report_format: str = "text"
    verbose_ambiguity: bool = False
    workers: int = 1

    def scorer_config(self) -> ScorerConfig:
        modules = set(self.enabled_modules)
        if self.level == "1":
            modules.discard("llc2")
        elif self.level == "2":
            modules.discard("llc1")
        rules, penalties = ({}, {})
        if self.infobox_rules_path:
            rules, penalties = load_infobox_rules(self.infobox_rules_path)
        return ScorerConfig(enabled_modules=frozenset(modules), infobox_rules=rules,
                            infobox_penalties=penalties)

    def linker_config(self) -> LinkerConfig:
        return LinkerConfig(nil_threshold=self.nil_threshold)


@contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _fail(message: str, code: int = EXIT_INPUT) -> int:
    print(f"wikied: error: {message}", file=sys.stderr)
    return code


def cmd_build_snapshot(dump_path: str, out_path: str, timestamp: Optional[int] = None) -> int:
    try:
        manifest = build_snapshot_from_dump(dump_path, out_path, timestamp)
    except FileNotFoundError as exc:
        return _fail(f"dump not found: {exc.filename}")
    except (WikiEDError, OSError, UnicodeDecodeError) as exc:
        return _fail(str(exc))
    print(f"wrote {out_path}: {manifest.summary()}")
    return EXIT_OK


def _load_inputs(cfg: RunConfig):
    snapshot = load_snapshot(cfg.snapshot_path)
    corpus = load_corpus(cfg.input_path, cfg.corpus_format, snapshot)
    return snapshot, corpus


def cmd_disambiguate(cfg: RunConfig) -> int:
    try:
        scorer, linker = cfg.scorer_config(), cfg.linker_config()
        snapshot, corpus = _load_inputs(cfg)
        annotations = link_corpus(corpus.documents, snapshot, scorer, linker, cfg.workers)
        with _output(cfg.output_path) as out:
            for ann in annotations:
                if cfg.report_format == "text":
                    out.write(format_explanation(explain(ann)) + "\n")
                else:
                    rec = ann.to_record(with_ambiguity=cfg.verbose_ambiguity)
                    out.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    except (WikiEDError, OSError) as exc:
        return _fail(str(exc))
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    try:
        scorer, linker = cfg.scorer_config(), cfg.linker_config()
        snapshot, corpus = _load_inputs(cfg)
        report = evaluate(corpus, snapshot, scorer, linker, cfg.workers)
        with _output(cfg.output_path) as out:
            if cfg.report_format == "json":
                out.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
            else:
                out.write(report.format_text() + "\n")
    except (WikiEDError, OSError) as exc:
        return _fail(str(exc))
    return EXIT_OK


def _modules(value: str) -> FrozenSet[str]:
    mods = frozenset(m.strip() for m in value.split(",") if m.strip())
    bad = mods - set(MODULES)
    if bad or not mods:
        raise argparse.ArgumentTypeError(
            f"choose a comma list from {','.join(MODULES)} (got {value!r})")
    return mods


def _threshold(value: str) -> float:
    try:
        v = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wikied", description="Unsupervised entity disambiguation over a wiki snapshot.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build-snapshot", help="build a snapshot from a dump file")
    b.add_argument("--input", required=True, help="dump file")
    b.add_argument("--output", required=True, help="snapshot file to write")
    b.add_argument("--timestamp", type=int, default=None,
                   help="build timestamp recorded in the manifest (default: $SOURCE_DATE_EPOCH or 0)")

    for name, help_text in (("disambiguate", "link mentions of a corpus"),
                            ("evaluate", "link a gold corpus and report micro P/R/F1")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--snapshot", required=True)
        p.add_argument("--input", required=True, help="corpus file (documents with mention spans)")
        p.add_argument("--output", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("native", "nif"), default="native")
        p.add_argument("--modules", type=_modules, default=frozenset(MODULES),
                       help="comma list of weighting modules (default: infobox,textual,llc1,llc2)")
        p.add_argument("--level", choices=("1", "2", "both"), default="both",
                       help="which link-graph level(s) to keep among the enabled modules")
        p.add_argument("--nil-threshold", type=_threshold, default=0.05)
        p.add_argument("--infobox-rules", default=None, help="JSON rules file (default: no rules)")
        p.add_argument("--workers", type=int, default=1)
        if name == "disambiguate":
            p.add_argument("--verbose-ambiguity", action="store_true",
                           help="include each mention's ambiguity list")
            p.add_argument("--report", choices=("json", "text"), default="json",
                           help="json: one record per mention; text: per-candidate table")
        else:
            p.add_argument("--report", choices=("json", "text"), default="text")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "build-snapshot":
            return cmd_build_snapshot(args.input, args.output, args.timestamp)
        cfg = RunConfig(
            snapshot_path=args.snapshot,
            input_path=args.input,
            output_path=args.output,
            corpus_format=args.format,
            enabled_modules=args.modules,
            level=args.level,
            nil_threshold=args.nil_threshold,
            infobox_rules_path=args.infobox_rules,
            report_format=args.report,
            verbose_ambiguity=getattr(args, "verbose_ambiguity", False),
            workers=max(1, args.workers),
        )
        if args.command == "disambiguate":
            return cmd_disambiguate(cfg)
        return cmd_evaluate(cfg)
    except Exception as exc:  # noqa: BLE001 - last-resort exit code 1
        log.exception("internal error")
        return _fail(f"internal error: {exc}", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
