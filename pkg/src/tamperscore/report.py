"""Rendering of assessment documents as color-coded factor/category/score
tables, in markdown, standalone HTML, and JSON.

Each source becomes one sub-table of seven rows in canonical factor order,
with row numbers running continuously across sources. Severity cells use
the fixed fills green #ABEBC6 (1), yellow #F9E79F (2), red #F5B7B1 (3).
"""

from __future__ import annotations

import html as html_module
import json
from dataclasses import dataclass
from datetime import datetime, timezone

from .assessment import (
    AssessmentDocument,
    WhatIfDiff,
    document_from_dict,
    document_to_dict,
    rank_sources,
    score_vector,
    weakness_summary,
)
from .errors import UnknownFormatError
from .rubric import FACTOR_ORDER, Rubric

SEVERITY_COLORS = {1: "#ABEBC6", 2: "#F9E79F", 3: "#F5B7B1"}
FORMATS = ("markdown", "html", "json")
_FORMAT_ALIASES = {"md": "markdown", "markdown": "markdown", "html": "html", "json": "json"}


@dataclass(frozen=True)
class RenderedReport:
    format: str
    body: bytes
    generated_at: str
    rubric_version: str
    document_id: str

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")


@dataclass(frozen=True)
class _Row:
    number: int
    source: str
    factor: str
    factor_name: str
    category_id: str | None
    category_text: str
    severity: int | None


def _normalize_format(fmt: str) -> str:
    normalized = _FORMAT_ALIASES.get(fmt)
    if normalized is None:
        raise UnknownFormatError(f"report format must be one of md, html, json; got {fmt!r}")
    return normalized


def _document_rows(doc: AssessmentDocument, rubric: Rubric) -> list[list[_Row]]:
    """Seven rows per source, numbered continuously; unassigned factors
    render as explicit gaps so numbering stays a bijection with
    (source, factor) pairs."""
    tables = []
    number = 0
    for assessment in doc.source_assessments:
        rows = []
        for factor_id in FACTOR_ORDER:
            number += 1
            factor = rubric.factor(factor_id)
            assignment = assessment.assignment_for(factor_id)
            if assignment is None:
                rows.append(
                    _Row(number, assessment.source, factor_id, factor.display_name, None, "(unassigned)", None)
                )
            else:
                option = factor.category(assignment.category)
                rows.append(
                    _Row(
                        number,
                        assessment.source,
                        factor_id,
                        factor.display_name,
                        option.id,
                        option.display_text,
                        int(option.severity),
                    )
                )
        tables.append(rows)
    return tables


def _header_lines(doc: AssessmentDocument, rubric: Rubric) -> list[str]:
    return [
        f"Document: {doc.id}",
        f"Rubric version: {rubric.version}",
        f"Profile: {doc.profile.user_privilege} on {doc.profile.os_family}",
    ]


def _render_markdown(doc: AssessmentDocument, rubric: Rubric) -> str:
    lines = [f"# Tamper resistance assessment: {doc.title}", ""]
    for line in _header_lines(doc, rubric):
        lines.append(f"- {line}")
    lines.append("")

    if not doc.source_assessments:
        lines.append("_No sources in this assessment._")
        return "\n".join(lines) + "\n"

    for assessment, rows in zip(doc.source_assessments, _document_rows(doc, rubric)):
        lines.append(f"## {assessment.source}")
        if not assessment.complete:
            lines.append("")
            lines.append("**INCOMPLETE** (missing: " + ", ".join(assessment.missing_factors()) + ")")
        lines.append("")
        lines.append("| n | Factors | Category | Score |")
        lines.append("| --- | --- | --- | --- |")
        for row in rows:
            score = str(row.severity) if row.severity is not None else ""
            lines.append(f"| {row.number} | {row.factor_name} | {row.category_text} | {score} |")
        lines.append("")
    return "\n".join(lines) + "\n"


_HTML_STYLE = (
    "body{font-family:sans-serif;margin:2em}"
    "table{border-collapse:collapse;margin-bottom:1.5em}"
    "th,td{border:1px solid #999;padding:4px 10px;text-align:left}"
    "caption{font-weight:bold;background:#F2F3F4;border:1px solid #999;padding:4px}"
    ".incomplete{color:#b00;font-weight:bold}"
)


def _render_html(doc: AssessmentDocument, rubric: Rubric) -> str:
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        f"<title>Tamper resistance assessment: {html_module.escape(doc.title)}</title>",
        f"<style>{_HTML_STYLE}</style>",
        "</head><body>",
        f"<h1>Tamper resistance assessment: {html_module.escape(doc.title)}</h1>",
        "<ul>",
    ]
    for line in _header_lines(doc, rubric):
        parts.append(f"<li>{html_module.escape(line)}</li>")
    parts.append("</ul>")

    if not doc.source_assessments:
        parts.append("<p><em>No sources in this assessment.</em></p>")
    for assessment, rows in zip(doc.source_assessments, _document_rows(doc, rubric)):
        parts.append("<table>")
        parts.append(f"<caption>{html_module.escape(assessment.source)}</caption>")
        if not assessment.complete:
            missing = ", ".join(assessment.missing_factors())
            parts.append(
                f'<tr><td colspan="4" class="incomplete">INCOMPLETE (missing: {html_module.escape(missing)})</td></tr>'
            )
        parts.append("<tr><th>n</th><th>Factors</th><th>Category</th><th>Score</th></tr>")
        for row in rows:
            if row.severity is None:
                score_cell = "<td></td>"
            else:
                color = SEVERITY_COLORS[row.severity]
                score_cell = f'<td style="background-color:{color}">{row.severity}</td>'
            parts.append(
                "<tr>"
                f"<td>{row.number}</td>"
                f"<td>{html_module.escape(row.factor_name)}</td>"
                f"<td>{html_module.escape(row.category_text)}</td>"
                f"{score_cell}"
                "</tr>"
            )
        parts.append("</table>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"


def _render_json(doc: AssessmentDocument, rubric: Rubric) -> str:
    incomplete = [a.source for a in doc.source_assessments if not a.complete]
    vectors = {
        assessment.source: [int(s) for s in score_vector(doc, assessment.source, rubric)]
        for assessment in doc.source_assessments
        if assessment.complete
    }
    weaknesses = {
        assessment.source: weakness_summary(doc, assessment.source, rubric)
        for assessment in doc.source_assessments
        if assessment.complete
    }
    if incomplete or not doc.source_assessments:
        rank = None
    else:
        rank = [
            {"rank": r.rank, "source": r.source, "profile": list(r.profile)}
            for r in rank_sources(doc, rubric)
        ]
    payload = {
        "document": document_to_dict(doc),
        "rubric_version": rubric.version,
        "score_vectors": vectors,
        "weaknesses": weaknesses,
        "rank": rank,
        "incomplete_sources": incomplete,
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def render(doc: AssessmentDocument, rubric: Rubric, fmt: str) -> RenderedReport:
    """Render the document. The body is a pure function of (doc, rubric,
    format): re-rendering an unchanged document is byte-identical."""
    normalized = _normalize_format(fmt)
    if normalized == "markdown":
        body = _render_markdown(doc, rubric)
    elif normalized == "html":
        body = _render_html(doc, rubric)
    else:
        body = _render_json(doc, rubric)
    return RenderedReport(
        format=normalized,
        body=body.encode("utf-8"),
        generated_at=datetime.now(timezone.utc).isoformat(),
        rubric_version=rubric.version,
        document_id=doc.id,
    )


def parse_json_report(body: bytes) -> AssessmentDocument:
    """Recover the embedded document from a JSON report body."""
    payload = json.loads(body.decode("utf-8"))
    return document_from_dict(payload["document"])


def _diff_row_cells(entry) -> tuple[str, str]:
    return (
        f"{entry.old_category} ({entry.old_severity})",
        f"{entry.new_category} ({entry.new_severity})",
    )


def _render_diff_markdown(diff: WhatIfDiff) -> str:
    lines = [f"# What-if comparison for document {diff.document_id}", ""]
    if not diff.entries:
        lines.append("_No changes._")
        return "\n".join(lines) + "\n"
    lines.append("| Source | Factor | Current | Under override | Note |")
    lines.append("| --- | --- | --- | --- | --- |")
    for entry in diff.entries:
        old, new = _diff_row_cells(entry)
        lines.append(f"| {entry.source} | {entry.factor} | {old} | {new} | {entry.note} |")
    lines.append("")
    return "\n".join(lines) + "\n"


def _render_diff_html(diff: WhatIfDiff) -> str:
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        f"<title>What-if comparison for document {html_module.escape(diff.document_id)}</title>",
        f"<style>{_HTML_STYLE}</style>",
        "</head><body>",
        f"<h1>What-if comparison for document {html_module.escape(diff.document_id)}</h1>",
    ]
    if not diff.entries:
        parts.append("<p><em>No changes.</em></p>")
    else:
        parts.append("<table>")
        parts.append(
            "<tr><th>Source</th><th>Factor</th><th>Current</th><th>Under override</th><th>Note</th></tr>"
        )
        for entry in diff.entries:
            old_color = SEVERITY_COLORS[entry.old_severity]
            new_color = SEVERITY_COLORS[entry.new_severity]
            parts.append(
                "<tr>"
                f"<td>{html_module.escape(entry.source)}</td>"
                f"<td>{html_module.escape(entry.factor)}</td>"
                f'<td style="background-color:{old_color}">{html_module.escape(entry.old_category)} ({entry.old_severity})</td>'
                f'<td style="background-color:{new_color}">{html_module.escape(entry.new_category)} ({entry.new_severity})</td>'
                f"<td>{html_module.escape(entry.note)}</td>"
                "</tr>"
            )
        parts.append("</table>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"


def diff_to_dict(diff: WhatIfDiff) -> dict:
    return {
        "document_id": diff.document_id,
        "entries": [
            {
                "source": entry.source,
                "factor": entry.factor,
                "old_category": entry.old_category,
                "new_category": entry.new_category,
                "old_severity": entry.old_severity,
                "new_severity": entry.new_severity,
                "manual_review": entry.manual_review,
                "note": entry.note,
            }
            for entry in diff.entries
        ],
    }


def render_diff(diff: WhatIfDiff, fmt: str) -> RenderedReport:
    """Render a what-if diff: changed cells side by side, manual cells
    flagged for review, unchanged cells omitted."""
    normalized = _normalize_format(fmt)
    if normalized == "markdown":
        body = _render_diff_markdown(diff)
    elif normalized == "html":
        body = _render_diff_html(diff)
    else:
        body = json.dumps(diff_to_dict(diff), indent=2, ensure_ascii=False) + "\n"
    return RenderedReport(
        format=normalized,
        body=body.encode("utf-8"),
        generated_at=datetime.now(timezone.utc).isoformat(),
        rubric_version="",
        document_id=diff.document_id,
    )
