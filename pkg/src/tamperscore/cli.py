"""Command-line entry point.

Every subcommand exits 0 on success and nonzero with the inner error's
stable name on failure, e.g. "error: unknown-source: ...".
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import defaults
from .assessment import (
    assign_category,
    cscale_advisory,
    dump_document,
    load_document,
    new_assessment,
    rank_sources,
    score_vector,
    whatif_diff,
)
from .context import load_profile
from .errors import EngineError
from .ingest import group_sources, map_to_kb, parse_timeline
from .knowledge_base import load_kb, parse_kb_document, validate_kb
from .report import render
from .rubric import load_rubric, rubric_from_dict, validate_rubric
from .service import ServiceConfig, serve


class _CliArgumentError(Exception):
    def __init__(self, message: str, unknown_subcommand: bool):
        super().__init__(message)
        self.unknown_subcommand = unknown_subcommand


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliArgumentError(message, unknown_subcommand="invalid choice" in message)


def _load_rubric_arg(path: str | None):
    if path is None:
        return defaults.default_rubric()
    return load_rubric(Path(path).read_bytes())


def _load_kb_arg(path: str | None, rubric):
    if path is None:
        return defaults.default_kb(rubric)
    return load_kb(Path(path).read_bytes(), rubric)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tamperscore", description="Tamper-resistance assessment of forensic timeline sources")
    commands = parser.add_subparsers(dest="command", metavar="command")

    p = commands.add_parser("rubric", help="rubric file operations")
    rubric_commands = p.add_subparsers(dest="subcommand", metavar="subcommand")
    v = rubric_commands.add_parser("validate", help="validate a rubric file")
    v.add_argument("path")

    p = commands.add_parser("kb", help="knowledge-base file operations")
    kb_commands = p.add_subparsers(dest="subcommand", metavar="subcommand")
    v = kb_commands.add_parser("validate", help="validate a knowledge-base file")
    v.add_argument("path")
    v.add_argument("--rubric", help="rubric file (default: shipped rubric)")

    p = commands.add_parser("assess", help="create and edit assessment documents")
    assess_commands = p.add_subparsers(dest="subcommand", metavar="subcommand")
    n = assess_commands.add_parser("new", help="create a prepopulated assessment document")
    n.add_argument("--kb")
    n.add_argument("--rubric")
    n.add_argument("--profile", required=True, help="environment profile file")
    n.add_argument("--sources", required=True, help="comma-separated knowledge-base source ids")
    n.add_argument("--out", required=True, help="output document path")
    n.add_argument("--title", default="Assessment")
    n.add_argument("--actor", default="investigator")
    s = assess_commands.add_parser("set", help="assign a category to one factor of one source")
    s.add_argument("doc")
    s.add_argument("source")
    s.add_argument("factor")
    s.add_argument("category")
    s.add_argument("--rationale", default="")
    s.add_argument("--rubric")
    s.add_argument("--actor", default="investigator")

    p = commands.add_parser("score", help="print per-source severity vectors")
    p.add_argument("doc")
    p.add_argument("--rubric")

    p = commands.add_parser("rank", help="order sources from most to least tamper-resistant")
    p.add_argument("doc")
    p.add_argument("--rubric")

    p = commands.add_parser("whatif", help="diff suggestions under an alternative profile")
    p.add_argument("doc")
    p.add_argument("--profile", required=True)
    p.add_argument("--kb")
    p.add_argument("--rubric")

    p = commands.add_parser("ingest", help="parse a timeline export and map sources to the KB")
    p.add_argument("timeline")
    p.add_argument("--format", required=True, choices=["csv", "jsonl"])
    p.add_argument("--mapping", help="source-type mapping file (default: shipped mapping)")
    p.add_argument("--kb")
    p.add_argument("--rubric")

    p = commands.add_parser("report", help="render a document as md, html or json")
    p.add_argument("doc")
    p.add_argument("--format", required=True, choices=["md", "html", "json"])
    p.add_argument("--out")
    p.add_argument("--rubric")

    p = commands.add_parser("cscale", help="tamper-resistance advisory for agreeing sources")
    p.add_argument("doc")
    p.add_argument("--sources", required=True, help="comma-separated source ids that agree")
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--rubric")

    p = commands.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--data-dir", default="./assessments")
    p.add_argument("--kb")
    p.add_argument("--rubric")
    p.add_argument("--profiles-dir")
    p.add_argument("--ui-dir")
    p.add_argument("--cscale-threshold", type=int, default=1)

    return parser


def _cmd_rubric_validate(args) -> int:
    raw = Path(args.path).read_bytes()
    rubric = rubric_from_dict(json.loads(raw.decode("utf-8")))
    report = validate_rubric(rubric)
    print(f"{len(report.findings)} findings")
    for finding in report.findings:
        print(f"  {finding.rule}: {finding.message}")
    return 0 if report.ok else 1


def _cmd_kb_validate(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    kb = parse_kb_document(Path(args.path).read_bytes())
    report = validate_kb(kb, rubric)
    print(f"{len(report.findings)} findings")
    for finding in report.findings:
        print(f"  {finding.rule}: {finding.message}")
    return 0 if report.ok else 1


def _cmd_assess_new(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    kb = _load_kb_arg(args.kb, rubric)
    profile = load_profile(Path(args.profile).read_bytes())
    source_ids = [s for s in args.sources.split(",") if s]
    doc = new_assessment(args.title, rubric, profile, kb, source_ids, actor=args.actor)
    Path(args.out).write_bytes(dump_document(doc))
    print(f"created {doc.id} with {len(doc.source_assessments)} source(s) -> {args.out}")
    return 0


def _cmd_assess_set(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    doc = load_document(Path(args.doc).read_bytes())
    assign_category(doc, args.source, args.factor, args.category, args.rationale, rubric, actor=args.actor)
    Path(args.doc).write_bytes(dump_document(doc))
    assignment = doc.assessment_for(args.source).assignment_for(args.factor)
    print(f"{args.source}/{args.factor} = {args.category} ({assignment.provenance})")
    return 0


def _cmd_score(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    doc = load_document(Path(args.doc).read_bytes())
    for assessment in doc.source_assessments:
        vector = score_vector(doc, assessment.source, rubric)
        print(f"{assessment.source}: {[int(s) for s in vector]}")
    return 0


def _cmd_rank(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    doc = load_document(Path(args.doc).read_bytes())
    for ranked in rank_sources(doc, rubric):
        print(f"{ranked.rank}. {ranked.source} {list(ranked.profile)}")
    return 0


def _cmd_whatif(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    kb = _load_kb_arg(args.kb, rubric)
    doc = load_document(Path(args.doc).read_bytes())
    override = load_profile(Path(args.profile).read_bytes())
    diff = whatif_diff(doc, override, kb, rubric)
    if not diff.entries:
        print("no changes")
        return 0
    for entry in diff.entries:
        flag = f"  [{entry.note}]" if entry.note else ""
        print(
            f"{entry.source}/{entry.factor}: {entry.old_category} ({entry.old_severity}) -> "
            f"{entry.new_category} ({entry.new_severity}){flag}"
        )
    return 0


def _cmd_ingest(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    kb = _load_kb_arg(args.kb, rubric)
    parsed = parse_timeline(Path(args.timeline).read_bytes(), args.format)
    occurrences = group_sources(parsed.entries)
    if args.mapping:
        mapping = json.loads(Path(args.mapping).read_text(encoding="utf-8"))
    else:
        mapping = defaults.default_mapping()
    result = map_to_kb(occurrences, mapping, kb)
    print(f"parsed {len(parsed.entries)} entries, rejected {len(parsed.rejects)} rows")
    for occurrence in occurrences:
        print(f"  {occurrence.source_type}: {occurrence.count}")
    print(f"mapped: {', '.join(result.mapped) or '(none)'}")
    print(f"unmapped: {', '.join(result.unmapped) or '(none)'}")
    return 0


def _cmd_report(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    doc = load_document(Path(args.doc).read_bytes())
    rendered = render(doc, rubric, args.format)
    if args.out:
        Path(args.out).write_bytes(rendered.body)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(rendered.text)
    return 0


def _cmd_cscale(args) -> int:
    rubric = _load_rubric_arg(args.rubric)
    doc = load_document(Path(args.doc).read_bytes())
    source_ids = [s for s in args.sources.split(",") if s]
    advisory = cscale_advisory(doc, rubric, source_ids, threshold=args.threshold)
    print(advisory.advisory_text)
    print(f"resistant: {advisory.resistant_count}, not resistant: {advisory.non_resistant_count}")
    return 0


def _cmd_serve(args) -> int:
    config = ServiceConfig(
        data_dir=args.data_dir,
        listen_port=args.port,
        kb_path=args.kb,
        rubric_path=args.rubric,
        profiles_dir=args.profiles_dir,
        ui_dir=args.ui_dir,
        cscale_threshold=args.cscale_threshold,
    )
    try:
        serve(config)
    except OSError as exc:
        print(f"error: port-in-use: {exc}", file=sys.stderr)
        return 1
    return 0


_HANDLERS = {
    ("rubric", "validate"): _cmd_rubric_validate,
    ("kb", "validate"): _cmd_kb_validate,
    ("assess", "new"): _cmd_assess_new,
    ("assess", "set"): _cmd_assess_set,
    ("score", None): _cmd_score,
    ("rank", None): _cmd_rank,
    ("whatif", None): _cmd_whatif,
    ("ingest", None): _cmd_ingest,
    ("report", None): _cmd_report,
    ("cscale", None): _cmd_cscale,
    ("serve", None): _cmd_serve,
}


def run_cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliArgumentError as exc:
        name = "unknown-subcommand" if exc.unknown_subcommand else "flag-parse-error"
        print(f"error: {name}: {exc}", file=sys.stderr)
        return 2

    command = getattr(args, "command", None)
    subcommand = getattr(args, "subcommand", None)
    handler = _HANDLERS.get((command, subcommand))
    if handler is None:
        parser.print_help(sys.stderr)
        return 2

    try:
        return handler(args)
    except EngineError as exc:
        print(f"error: {exc.name}: {exc.detail}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: unreadable-file: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: parse-error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
