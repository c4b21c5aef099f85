"""Facet-granular catalog of known forensic sources.

Each SourceDefinition describes one facet of one artifact (e.g. the SIA
creation timestamp inside an MFT record, not "the MFT") together with the
intrinsic properties and conditional rules the suggestion engine needs.
The knowledge base also carries a catalog of well-known software
capabilities that profiles can copy from.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .context import SoftwareCapability, capability_from_dict, capability_to_dict
from .errors import (
    DanglingCategoryReferenceError,
    DuplicateSourceIdError,
    NotFoundError,
    ParseError,
    SchemaError,
)
from .rubric import Rubric, ValidationReport

ENCRYPTION_KINDS = ("none", "encrypted", "transparent-os", "trivial")
KEY_LOCATIONS = ("local", "off-device")


@dataclass(frozen=True)
class VisibilityCondition:
    """One conditional visibility rule; all stated conditions must hold."""

    category: str
    when_privilege: frozenset[str] = frozenset()
    when_flag: tuple[tuple[str, bool], ...] = ()


@dataclass(frozen=True)
class VisibilityRule:
    rules: tuple[VisibilityCondition, ...]
    default: str

    def categories(self) -> list[str]:
        return [rule.category for rule in self.rules] + [self.default]


@dataclass(frozen=True)
class EncryptionDeclaration:
    kind: str
    key_location: str | None = None

    def __post_init__(self):
        if self.kind not in ENCRYPTION_KINDS:
            raise SchemaError(f"encryption kind must be one of {ENCRYPTION_KINDS}, got {self.kind!r}")
        if self.kind == "encrypted":
            if self.key_location not in KEY_LOCATIONS:
                raise SchemaError(f"encrypted sources need key_location in {KEY_LOCATIONS}")
        elif self.key_location is not None:
            raise SchemaError("key_location is only meaningful for kind 'encrypted'")


@dataclass(frozen=True)
class SourceDefinition:
    id: str
    display_name: str
    source_class: str
    facet: str
    baseline_protection: str
    intrinsic_format: str
    intrinsic_organization: str
    visibility_rule: VisibilityRule
    encryption_declaration: EncryptionDeclaration
    notes: str = ""
    # whether UI-level edit capability makes the low-level format irrelevant
    # for this facet (false when a UI tool only exposes a hex view of it)
    ui_tool_masks_format: bool = True


@dataclass(frozen=True)
class KnowledgeBase:
    version: str
    sources: tuple[SourceDefinition, ...]
    class_index: dict[str, tuple[str, ...]] = field(default_factory=dict)
    software_capabilities: tuple[SoftwareCapability, ...] = ()

    def source_ids(self) -> list[str]:
        return [source.id for source in self.sources]


def build_class_index(sources: tuple[SourceDefinition, ...]) -> dict[str, tuple[str, ...]]:
    index: dict[str, list[str]] = {}
    for source in sources:
        index.setdefault(source.source_class, []).append(source.id)
    return {cls: tuple(ids) for cls, ids in index.items()}


def lookup_source(kb: KnowledgeBase, source_id: str) -> SourceDefinition:
    for source in kb.sources:
        if source.id == source_id:
            return source
    raise NotFoundError(f"source {source_id!r} is not in the knowledge base")


def validate_kb(kb: KnowledgeBase, rubric: Rubric) -> ValidationReport:
    """Zero findings iff ids are unique, every category reference resolves
    in the rubric, and the class index matches the grouping of sources."""
    report = ValidationReport()

    seen: set[str] = set()
    for source in kb.sources:
        if source.id in seen:
            report.add("", source.id, "duplicate-source-id", f"source id {source.id!r} appears more than once")
        seen.add(source.id)

        if not source.facet:
            report.add("", source.id, "empty-facet", f"source {source.id!r} does not name the facet it scores")

        refs = [
            ("file-format", source.intrinsic_format),
            ("organization", source.intrinsic_organization),
        ]
        refs.extend(("visibility", category) for category in source.visibility_rule.categories())
        for factor_id, category in refs:
            if not rubric.has_category(factor_id, category):
                report.add(
                    factor_id,
                    category,
                    "dangling-category-reference",
                    f"source {source.id!r} references {factor_id}/{category} which is not in the rubric",
                )

    if kb.class_index != build_class_index(kb.sources):
        report.add("", "", "class-index-mismatch", "class_index does not match the grouping of sources by class")

    return report


# ---------------------------------------------------------------------------
# (De)serialization
# ---------------------------------------------------------------------------

def _visibility_rule_from_dict(data: dict) -> VisibilityRule:
    rules = []
    for rdata in data.get("rules", []):
        rules.append(
            VisibilityCondition(
                category=str(rdata["category"]),
                when_privilege=frozenset(str(p) for p in rdata.get("when_privilege", [])),
                when_flag=tuple(sorted((str(k), bool(v)) for k, v in rdata.get("when_flag", {}).items())),
            )
        )
    try:
        return VisibilityRule(rules=tuple(rules), default=str(data["default"]))
    except KeyError:
        raise SchemaError("visibility_rule needs a 'default' category") from None


def _visibility_rule_to_dict(rule: VisibilityRule) -> dict:
    rules = []
    for condition in rule.rules:
        rdata: dict = {}
        if condition.when_privilege:
            rdata["when_privilege"] = sorted(condition.when_privilege)
        if condition.when_flag:
            rdata["when_flag"] = dict(condition.when_flag)
        rdata["category"] = condition.category
        rules.append(rdata)
    return {"rules": rules, "default": rule.default}


def source_from_dict(data: dict) -> SourceDefinition:
    try:
        encryption = data["encryption_declaration"]
        return SourceDefinition(
            id=str(data["id"]),
            display_name=str(data["display_name"]),
            source_class=str(data["source_class"]),
            facet=str(data["facet"]),
            baseline_protection=str(data["baseline_protection"]),
            intrinsic_format=str(data["intrinsic_format"]),
            intrinsic_organization=str(data["intrinsic_organization"]),
            visibility_rule=_visibility_rule_from_dict(data["visibility_rule"]),
            encryption_declaration=EncryptionDeclaration(
                kind=str(encryption["kind"]),
                key_location=encryption.get("key_location"),
            ),
            notes=str(data.get("notes", "")),
            ui_tool_masks_format=bool(data.get("ui_tool_masks_format", True)),
        )
    except KeyError as exc:
        raise SchemaError(f"source definition missing field {exc.args[0]!r}") from None


def source_to_dict(source: SourceDefinition) -> dict:
    encryption: dict = {"kind": source.encryption_declaration.kind}
    if source.encryption_declaration.key_location is not None:
        encryption["key_location"] = source.encryption_declaration.key_location
    return {
        "id": source.id,
        "display_name": source.display_name,
        "source_class": source.source_class,
        "facet": source.facet,
        "baseline_protection": source.baseline_protection,
        "intrinsic_format": source.intrinsic_format,
        "intrinsic_organization": source.intrinsic_organization,
        "ui_tool_masks_format": source.ui_tool_masks_format,
        "visibility_rule": _visibility_rule_to_dict(source.visibility_rule),
        "encryption_declaration": encryption,
        "notes": source.notes,
    }


def kb_to_dict(kb: KnowledgeBase) -> dict:
    return {
        "version": kb.version,
        "sources": [source_to_dict(source) for source in kb.sources],
        "software_capabilities": [capability_to_dict(cap) for cap in kb.software_capabilities],
    }


def dump_kb(kb: KnowledgeBase) -> bytes:
    return (json.dumps(kb_to_dict(kb), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def kb_from_dict(data: dict) -> KnowledgeBase:
    """Permissive construction: invariant violations are left for
    validate_kb; only structural problems raise."""
    if not isinstance(data, dict) or not isinstance(data.get("sources"), list):
        raise SchemaError('knowledge base needs a "sources" list')
    sources = tuple(source_from_dict(s) for s in data["sources"])
    return KnowledgeBase(
        version=str(data.get("version", "0")),
        sources=sources,
        class_index=build_class_index(sources),
        software_capabilities=tuple(capability_from_dict(c) for c in data.get("software_capabilities", [])),
    )


def parse_kb_document(document: bytes | str) -> KnowledgeBase:
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"knowledge base is not UTF-8: {exc}") from None
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"knowledge base is not valid JSON: {exc}") from None
    return kb_from_dict(data)


def load_kb(document: bytes | str, rubric: Rubric) -> KnowledgeBase:
    """Parse a knowledge-base document and resolve all rubric references.

    Raises parse-error on malformed JSON, duplicate-source-id,
    dangling-category-reference (naming the factor and category), and
    schema-error for structural problems.
    """
    kb = parse_kb_document(document)
    report = validate_kb(kb, rubric)
    for finding in report.findings:
        if finding.rule == "duplicate-source-id":
            raise DuplicateSourceIdError(finding.message)
        if finding.rule == "dangling-category-reference":
            raise DanglingCategoryReferenceError(finding.message)
        raise SchemaError(f"{finding.rule}: {finding.message}")
    return kb
