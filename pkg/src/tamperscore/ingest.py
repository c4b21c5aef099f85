"""Timeline export ingestion: parse CSV/JSONL exports, group entries by
originating source type, and map source types onto knowledge-base entries
to seed an assessment.

Timeline tools tag entries at source-class level while the knowledge base
is facet-granular, so mapping targets a representative facet.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime

from .errors import (
    DanglingMappingTargetError,
    MissingRequiredColumnError,
    UnknownFormatError,
    UnreadableFileError,
)
from .knowledge_base import KnowledgeBase

REQUIRED_COLUMNS = ("datetime", "source", "message")
MAX_SAMPLE_PATHS = 5


def _parse_timestamp(raw: str) -> datetime:
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


@dataclass(frozen=True)
class TimelineEntry:
    timestamp: datetime
    source_type: str
    message: str
    origin_path: str | None = None


@dataclass(frozen=True)
class RejectedRow:
    line_number: int
    reason: str
    raw: str


@dataclass
class ParseResult:
    entries: list[TimelineEntry] = field(default_factory=list)
    rejects: list[RejectedRow] = field(default_factory=list)


@dataclass(frozen=True)
class SourceOccurrence:
    source_type: str
    count: int
    sample_paths: tuple[str, ...] = ()


@dataclass(frozen=True)
class MappingResult:
    mapped: tuple[str, ...]
    unmapped: tuple[str, ...]


def _make_entry(datetime_text, source_text, message_text, path_text) -> TimelineEntry:
    if not datetime_text:
        raise ValueError("missing datetime")
    if not source_text:
        raise ValueError("missing source")
    try:
        timestamp = _parse_timestamp(str(datetime_text))
    except ValueError:
        raise ValueError(f"unparseable datetime {datetime_text!r}") from None
    return TimelineEntry(
        timestamp=timestamp,
        source_type=str(source_text),
        message=str(message_text or ""),
        origin_path=str(path_text) if path_text else None,
    )


def _parse_csv(text: str) -> ParseResult:
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [column for column in REQUIRED_COLUMNS if column not in header]
    if missing:
        raise MissingRequiredColumnError(f"timeline CSV is missing column(s): {', '.join(missing)}")

    result = ParseResult()
    for line_number, row in enumerate(reader, start=2):
        try:
            result.entries.append(
                _make_entry(row.get("datetime"), row.get("source"), row.get("message"), row.get("path"))
            )
        except ValueError as exc:
            result.rejects.append(RejectedRow(line_number=line_number, reason=str(exc), raw=str(row)))
    return result


def _parse_jsonl(text: str) -> ParseResult:
    result = ParseResult()
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            result.entries.append(
                _make_entry(obj.get("datetime"), obj.get("source"), obj.get("message"), obj.get("path"))
            )
        except (ValueError, json.JSONDecodeError) as exc:
            result.rejects.append(RejectedRow(line_number=line_number, reason=str(exc), raw=line))
    return result


def parse_timeline(data: bytes | str, fmt: str) -> ParseResult:
    """Parse a timeline export; malformed rows become rejects, not errors.

    CSV needs the header columns datetime,source,message (extras ignored);
    JSONL needs those keys per line, plus optional path.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnreadableFileError(f"timeline is not UTF-8: {exc}") from None
    else:
        text = data
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "jsonl":
        return _parse_jsonl(text)
    raise UnknownFormatError(f"timeline format must be csv or jsonl, got {fmt!r}")


def group_sources(entries: list[TimelineEntry]) -> list[SourceOccurrence]:
    """One occurrence per distinct source type; counts sum to the entry count.

    Order-insensitive: sample paths are the lexicographically smallest
    distinct origin paths, and occurrences are sorted by source type.
    """
    counts: dict[str, int] = defaultdict(int)
    paths: dict[str, set[str]] = defaultdict(set)
    for entry in entries:
        counts[entry.source_type] += 1
        if entry.origin_path:
            paths[entry.source_type].add(entry.origin_path)
    return [
        SourceOccurrence(
            source_type=source_type,
            count=count,
            sample_paths=tuple(sorted(paths[source_type])[:MAX_SAMPLE_PATHS]),
        )
        for source_type, count in sorted(counts.items())
    ]


def map_to_kb(
    occurrences: list[SourceOccurrence],
    mapping: dict[str, str],
    kb: KnowledgeBase,
) -> MappingResult:
    """Partition occurrences into knowledge-base source ids and unmapped
    source types. Every mapping target must exist in the KB."""
    known = set(kb.source_ids())
    for source_type, target in mapping.items():
        if target not in known:
            raise DanglingMappingTargetError(
                f"mapping for {source_type!r} targets {target!r}, which is not in the knowledge base"
            )
    mapped = []
    unmapped = []
    for occurrence in occurrences:
        target = mapping.get(occurrence.source_type)
        if target is None:
            unmapped.append(occurrence.source_type)
        else:
            mapped.append(target)
    return MappingResult(mapped=tuple(mapped), unmapped=tuple(unmapped))
