"""Assessment documents: per-source category assignments bound to one
environment profile and one rubric version.

A document is created prepopulated with suggested assignments, then edited
by the investigator; every mutation appends to an audit log from which the
document can be replayed. Cross-source comparison never sums severities:
the only comparator is the descending-sorted severity profile, compared
lexicographically (ascending = most tamper-resistant first).
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .context import (
    EnvironmentProfile,
    FactorAssignment,
    profile_from_dict,
    profile_to_dict,
    suggest_assignments,
)
from .errors import (
    EmptySourceSetError,
    IncompleteAssessmentError,
    InvalidCategoryForFactorError,
    NotFoundError,
    ParseError,
    RubricVersionMismatchError,
    SchemaError,
    UnknownSourceError,
)
from .knowledge_base import KnowledgeBase, lookup_source
from .rubric import FACTOR_ORDER, Rubric, Severity, severity_of


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class AuditEntry:
    timestamp: str
    actor: str
    change: dict


@dataclass
class SourceAssessment:
    source: str
    assignments: list[FactorAssignment] = field(default_factory=list)

    def assignment_for(self, factor_id: str) -> FactorAssignment | None:
        for assignment in self.assignments:
            if assignment.factor == factor_id:
                return assignment
        return None

    def missing_factors(self) -> list[str]:
        assigned = {a.factor for a in self.assignments}
        return [factor_id for factor_id in FACTOR_ORDER if factor_id not in assigned]

    @property
    def complete(self) -> bool:
        return not self.missing_factors()


@dataclass
class AssessmentDocument:
    id: str
    title: str
    rubric_version: str
    profile: EnvironmentProfile
    source_assessments: list[SourceAssessment] = field(default_factory=list)
    audit_log: list[AuditEntry] = field(default_factory=list)

    def assessment_for(self, source_id: str) -> SourceAssessment:
        for assessment in self.source_assessments:
            if assessment.source == source_id:
                return assessment
        raise UnknownSourceError(f"source {source_id!r} is not part of this document")

    def source_ids(self) -> list[str]:
        return [assessment.source for assessment in self.source_assessments]


def _check_rubric_version(doc: AssessmentDocument, rubric: Rubric) -> None:
    if doc.rubric_version != rubric.version:
        raise RubricVersionMismatchError(
            f"document was scored under rubric {doc.rubric_version!r}, got {rubric.version!r};"
            " scores are never silently recomputed under a different rubric"
        )


def new_assessment(
    title: str,
    rubric: Rubric,
    profile: EnvironmentProfile,
    kb: KnowledgeBase,
    source_ids: list[str],
    actor: str = "investigator",
    doc_id: str | None = None,
) -> AssessmentDocument:
    """Create a document with one SourceAssessment per source, prepopulated
    with suggested assignments, and a single creation audit entry."""
    assessments = []
    for source_id in source_ids:
        try:
            source = lookup_source(kb, source_id)
        except NotFoundError:
            raise UnknownSourceError(f"source {source_id!r} is not in the knowledge base") from None
        assessments.append(
            SourceAssessment(source=source_id, assignments=suggest_assignments(profile, source, rubric))
        )

    doc = AssessmentDocument(
        id=doc_id or uuid.uuid4().hex,
        title=title,
        rubric_version=rubric.version,
        profile=profile,
        source_assessments=assessments,
    )
    doc.audit_log.append(
        AuditEntry(
            timestamp=_utc_now(),
            actor=actor,
            change={
                "op": "create",
                "title": title,
                "rubric_version": rubric.version,
                "source_ids": list(source_ids),
            },
        )
    )
    return doc


def _apply_assignment_change(doc: AssessmentDocument, change: dict) -> None:
    if not change.get("applied", True):
        return
    assessment = doc.assessment_for(change["source"])
    new = FactorAssignment(
        factor=change["factor"],
        category=change["category"],
        provenance=change["provenance"],
        rationale=change["rationale"],
    )
    for i, existing in enumerate(assessment.assignments):
        if existing.factor == new.factor:
            assessment.assignments[i] = new
            return
    assessment.assignments.append(new)


def assign_category(
    doc: AssessmentDocument,
    source_id: str,
    factor_id: str,
    category_id: str,
    rationale: str,
    rubric: Rubric,
    actor: str = "investigator",
) -> AssessmentDocument:
    """Record an investigator's category choice for one cell.

    Overriding a suggestion yields provenance manual-override-of-suggestion;
    anything else is manual. Re-assigning the already-assigned category
    changes nothing but still leaves an audit entry. Mutates and returns doc.
    """
    _check_rubric_version(doc, rubric)
    assessment = doc.assessment_for(source_id)
    factor = rubric.factor(factor_id)
    if category_id not in factor.category_ids():
        raise InvalidCategoryForFactorError(
            f"category {category_id!r} is not an option of factor {factor_id!r}"
        )

    existing = assessment.assignment_for(factor_id)
    if existing is not None and existing.category == category_id:
        applied = False
        provenance = existing.provenance
    else:
        applied = True
        provenance = (
            "manual-override-of-suggestion"
            if existing is not None and existing.provenance == "suggested"
            else "manual"
        )

    change = {
        "op": "assign",
        "source": source_id,
        "factor": factor_id,
        "category": category_id,
        "provenance": provenance,
        "rationale": rationale,
        "applied": applied,
    }
    _apply_assignment_change(doc, change)
    doc.audit_log.append(AuditEntry(timestamp=_utc_now(), actor=actor, change=change))
    return doc


def score_vector(doc: AssessmentDocument, source_id: str, rubric: Rubric) -> list[Severity]:
    """Severities of the source's assignments, in canonical factor order."""
    _check_rubric_version(doc, rubric)
    assessment = doc.assessment_for(source_id)
    missing = assessment.missing_factors()
    if missing:
        raise IncompleteAssessmentError(
            f"source {source_id!r} is missing factors: {', '.join(missing)}",
            missing={source_id: missing},
        )
    return [
        severity_of(rubric, factor_id, assessment.assignment_for(factor_id).category)
        for factor_id in FACTOR_ORDER
    ]


def resistance_profile(doc: AssessmentDocument, source_id: str, rubric: Rubric) -> tuple[int, ...]:
    """The source's severities sorted descending; the cross-source comparator."""
    return tuple(sorted((int(s) for s in score_vector(doc, source_id, rubric)), reverse=True))


@dataclass(frozen=True)
class RankedSource:
    rank: int
    source: str
    profile: tuple[int, ...]


def rank_sources(doc: AssessmentDocument, rubric: Rubric) -> list[RankedSource]:
    """Order sources from most to least tamper-resistant.

    Comparator: each source's severities sorted descending, compared
    lexicographically, ascending. Equal profiles share a (dense) rank.
    Deliberately not an arithmetic total: factors are independent, so no
    meaningful sum exists.
    """
    _check_rubric_version(doc, rubric)
    missing: dict[str, list[str]] = {}
    for assessment in doc.source_assessments:
        if not assessment.complete:
            missing[assessment.source] = assessment.missing_factors()
    if missing:
        raise IncompleteAssessmentError(
            "cannot rank with incomplete assessments: "
            + "; ".join(f"{src}: {', '.join(factors)}" for src, factors in missing.items()),
            missing=missing,
        )

    profiles = sorted(
        (resistance_profile(doc, assessment.source, rubric), assessment.source)
        for assessment in doc.source_assessments
    )
    ranked = []
    rank = 0
    previous: tuple[int, ...] | None = None
    for profile, source_id in profiles:
        if profile != previous:
            rank += 1
            previous = profile
        ranked.append(RankedSource(rank=rank, source=source_id, profile=profile))
    return ranked


def weakness_summary(doc: AssessmentDocument, source_id: str, rubric: Rubric) -> list[str]:
    """Factor ids whose assigned category carries the highest severity."""
    vector = score_vector(doc, source_id, rubric)
    return [factor_id for factor_id, severity in zip(FACTOR_ORDER, vector) if severity == Severity.HIGH]


@dataclass(frozen=True)
class SourceResistance:
    source: str
    weakness_factors: tuple[str, ...]
    resistant: bool


@dataclass(frozen=True)
class CScaleAdvisory:
    resistant_count: int
    non_resistant_count: int
    advisory_text: str
    threshold: int
    sources: tuple[SourceResistance, ...]


def cscale_advisory(
    doc: AssessmentDocument,
    rubric: Rubric,
    agreeing_source_ids: list[str],
    threshold: int = 1,
) -> CScaleAdvisory:
    """Classify agreeing sources as tamper-resistant or not, as input to a
    strength-of-evidence (C-Scale) judgment.

    A source counts as tamper-resistant when its number of highest-severity
    factors is at most `threshold` (default 1; configurable, since no
    published cut-off exists). The output is advisory only.
    """
    if not agreeing_source_ids:
        raise EmptySourceSetError("cscale advisory needs at least one agreeing source")

    classified = []
    for source_id in agreeing_source_ids:
        weaknesses = tuple(weakness_summary(doc, source_id, rubric))
        classified.append(
            SourceResistance(source=source_id, weakness_factors=weaknesses, resistant=len(weaknesses) <= threshold)
        )

    resistant = sum(1 for c in classified if c.resistant)
    non_resistant = len(classified) - resistant

    if len(classified) == 1:
        single = classified[0]
        if single.resistant:
            body = (
                f"A single agreeing source ({single.source}) that this assessment classifies as "
                f"tamper-resistant ({len(single.weakness_factors)} high-concern factor(s), threshold {threshold})."
            )
        else:
            body = (
                f"A single agreeing source ({single.source}) that is NOT difficult to tamper with "
                f"({len(single.weakness_factors)} high-concern factors, threshold {threshold}). This matches the "
                'C-Scale C2 indicator: "only one source of evidence that is not difficult to tamper with".'
            )
    elif non_resistant == 0:
        body = (
            f"All {resistant} agreeing sources are classified tamper-resistant at threshold {threshold}; "
            "multiple independent, hard-to-tamper sources strengthen the evidence."
        )
    elif resistant == 0:
        body = (
            f"None of the {non_resistant} agreeing sources is classified tamper-resistant at threshold "
            f"{threshold}; agreement rests entirely on sources that are not difficult to tamper with."
        )
    else:
        body = (
            f"{resistant} of {len(classified)} agreeing sources are classified tamper-resistant at "
            f"threshold {threshold}; corroboration partly rests on easier-to-tamper sources."
        )

    text = (
        "ADVISORY: "
        + body
        + " The final strength-of-evidence judgment remains with the investigator."
    )
    return CScaleAdvisory(
        resistant_count=resistant,
        non_resistant_count=non_resistant,
        advisory_text=text,
        threshold=threshold,
        sources=tuple(classified),
    )


@dataclass(frozen=True)
class WhatIfCellDiff:
    source: str
    factor: str
    old_category: str
    new_category: str
    old_severity: int
    new_severity: int
    manual_review: bool = False
    note: str = ""


@dataclass(frozen=True)
class WhatIfDiff:
    document_id: str
    entries: tuple[WhatIfCellDiff, ...]


def whatif_diff(
    doc: AssessmentDocument,
    override_profile: EnvironmentProfile,
    kb: KnowledgeBase,
    rubric: Rubric,
) -> WhatIfDiff:
    """Recompute suggestions under an alternative profile and diff them
    against the document's suggested baselines.

    Cells the investigator chose manually are never silently replaced: when
    the environment change would move such a cell, the diff flags it
    "manual — review required" instead. The document is not mutated.
    Applying the document's own profile yields an empty diff.
    """
    _check_rubric_version(doc, rubric)
    entries = []
    for assessment in doc.source_assessments:
        source = lookup_source(kb, assessment.source)
        baseline = {a.factor: a for a in suggest_assignments(doc.profile, source, rubric)}
        proposed = {a.factor: a for a in suggest_assignments(override_profile, source, rubric)}
        for factor_id in FACTOR_ORDER:
            if baseline[factor_id].category == proposed[factor_id].category:
                continue
            current = assessment.assignment_for(factor_id)
            old_category = current.category if current is not None else baseline[factor_id].category
            new_category = proposed[factor_id].category
            manual = current is not None and current.provenance != "suggested"
            entries.append(
                WhatIfCellDiff(
                    source=assessment.source,
                    factor=factor_id,
                    old_category=old_category,
                    new_category=new_category,
                    old_severity=int(severity_of(rubric, factor_id, old_category)),
                    new_severity=int(severity_of(rubric, factor_id, new_category)),
                    manual_review=manual,
                    note="manual — review required" if manual else "",
                )
            )
    return WhatIfDiff(document_id=doc.id, entries=tuple(entries))


def replay_audit(doc: AssessmentDocument, kb: KnowledgeBase, rubric: Rubric) -> AssessmentDocument:
    """Rebuild the document from its creation state plus the audit log.

    The creation entry records the inputs; suggestions are recomputed (they
    are pure functions of profile, source and rubric) and every later entry
    is applied verbatim. The result must equal the live document.
    """
    if not doc.audit_log or doc.audit_log[0].change.get("op") != "create":
        raise SchemaError("audit log does not start with a creation entry")
    creation = doc.audit_log[0]
    replayed = new_assessment(
        title=creation.change["title"],
        rubric=rubric,
        profile=doc.profile,
        kb=kb,
        source_ids=list(creation.change["source_ids"]),
        actor=creation.actor,
        doc_id=doc.id,
    )
    replayed.audit_log = [creation]
    for entry in doc.audit_log[1:]:
        if entry.change.get("op") == "assign":
            _apply_assignment_change(replayed, entry.change)
        replayed.audit_log.append(entry)
    return replayed


# ---------------------------------------------------------------------------
# (De)serialization
# ---------------------------------------------------------------------------

def document_to_dict(doc: AssessmentDocument) -> dict:
    return {
        "id": doc.id,
        "title": doc.title,
        "rubric_version": doc.rubric_version,
        "profile": profile_to_dict(doc.profile),
        "source_assessments": [
            {
                "source": assessment.source,
                "assignments": [
                    {
                        "factor": a.factor,
                        "category": a.category,
                        "provenance": a.provenance,
                        "rationale": a.rationale,
                    }
                    for a in assessment.assignments
                ],
            }
            for assessment in doc.source_assessments
        ],
        "audit_log": [
            {"timestamp": entry.timestamp, "actor": entry.actor, "change": entry.change}
            for entry in doc.audit_log
        ],
    }


def document_from_dict(data: dict) -> AssessmentDocument:
    try:
        return AssessmentDocument(
            id=str(data["id"]),
            title=str(data["title"]),
            rubric_version=str(data["rubric_version"]),
            profile=profile_from_dict(data["profile"]),
            source_assessments=[
                SourceAssessment(
                    source=str(sdata["source"]),
                    assignments=[
                        FactorAssignment(
                            factor=str(adata["factor"]),
                            category=str(adata["category"]),
                            provenance=str(adata["provenance"]),
                            rationale=str(adata["rationale"]),
                        )
                        for adata in sdata["assignments"]
                    ],
                )
                for sdata in data["source_assessments"]
            ],
            audit_log=[
                AuditEntry(timestamp=str(edata["timestamp"]), actor=str(edata["actor"]), change=edata["change"])
                for edata in data["audit_log"]
            ],
        )
    except KeyError as exc:
        raise SchemaError(f"assessment document missing field {exc.args[0]!r}") from None


def dump_document(doc: AssessmentDocument) -> bytes:
    return (json.dumps(document_to_dict(doc), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def load_document(document: bytes | str) -> AssessmentDocument:
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"assessment document is not UTF-8: {exc}") from None
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"assessment document is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("assessment document must be a JSON object")
    return document_from_dict(data)
