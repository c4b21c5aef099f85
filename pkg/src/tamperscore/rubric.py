"""Seven-factor tamper-resistance rubric: factor/category definitions,
severity lookup, and structural validation.

A rubric maps every (factor, category) pair to a severity in {1, 2, 3}
where a higher value means a source is easier to tamper with. Categories
within a factor are ordered by rank, ascending tampering concern, and
severity must never decrease as rank increases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

from .errors import (
    MonotonicityError,
    ParseError,
    SchemaError,
    UnknownCategoryError,
    UnknownFactorError,
)

# The seven factors, in the canonical order used by every score vector,
# report row, and rank profile.
FACTOR_ORDER = (
    "visibility",
    "permissions",
    "edit-software",
    "access-facets",
    "encryption",
    "file-format",
    "organization",
)

PROVENANCE_VALUES = ("paper-table", "framework-decision")

# (factor, category) -> severity pairs that are directly readable from the
# published case tables. Only these rows may carry provenance "paper-table".
PAPER_TABLE_PAIRS: dict[tuple[str, str], int] = {
    ("visibility", "cannot-be-made-visible"): 1,
    ("visibility", "setting-change-not-enabled"): 1,
    ("visibility", "gui-visible"): 3,
    ("permissions", "user-inaccessible"): 1,
    ("permissions", "accessible-with-prompt"): 3,
    ("permissions", "user-accessible"): 3,
    ("edit-software", "not-on-system"): 1,
    ("edit-software", "added-ui-tool"): 3,
    ("edit-software", "default-ui-tool"): 3,
    ("access-facets", "no-observed-facets"): 1,
    ("access-facets", "software-run"): 2,
    ("encryption", "no-encryption"): 3,
    ("file-format", "binary-reverse-engineered"): 2,
    ("file-format", "plain-text"): 3,
    ("file-format", "na-ui-tool"): 3,
    ("organization", "semi-structured"): 2,
    ("organization", "structured"): 2,
}


class Severity(IntEnum):
    """Tampering concern: higher value = easier to tamper with."""

    LOW = 1
    MODERATE = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return {1: "low", 2: "moderate", 3: "high"}[int(self)]

    @classmethod
    def from_value(cls, value: int) -> "Severity":
        try:
            return cls(value)
        except ValueError:
            raise SchemaError(f"severity must be 1, 2 or 3, got {value!r}") from None


@dataclass(frozen=True)
class CategoryOption:
    id: str
    display_text: str
    rank: int
    severity: Severity
    provenance: str


@dataclass(frozen=True)
class Factor:
    id: str
    display_name: str
    categories: tuple[CategoryOption, ...]

    def category(self, category_id: str) -> CategoryOption:
        for option in self.categories:
            if option.id == category_id:
                return option
        raise UnknownCategoryError(
            f"category {category_id!r} not defined for factor {self.id!r}"
        )

    def category_ids(self) -> list[str]:
        return [option.id for option in self.categories]


@dataclass(frozen=True)
class Rubric:
    version: str
    factors: tuple[Factor, ...]

    def factor(self, factor_id: str) -> Factor:
        for f in self.factors:
            if f.id == factor_id:
                return f
        raise UnknownFactorError(f"factor {factor_id!r} not in rubric")

    def has_category(self, factor_id: str, category_id: str) -> bool:
        try:
            self.factor(factor_id).category(category_id)
        except (UnknownFactorError, UnknownCategoryError):
            return False
        return True


@dataclass(frozen=True)
class ValidationFinding:
    factor: str
    category: str
    rule: str
    message: str


@dataclass
class ValidationReport:
    findings: list[ValidationFinding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, factor: str, category: str, rule: str, message: str) -> None:
        self.findings.append(ValidationFinding(factor, category, rule, message))


def severity_of(rubric: Rubric, factor_id: str, category_id: str) -> Severity:
    """Look up the severity assigned to a category. Pure function of the
    rubric content; raises unknown-factor / unknown-category otherwise."""
    return rubric.factor(factor_id).category(category_id).severity


def validate_rubric(rubric: Rubric) -> ValidationReport:
    """Check every structural invariant; findings are data, not errors."""
    report = ValidationReport()

    seen: dict[str, int] = {}
    for f in rubric.factors:
        seen[f.id] = seen.get(f.id, 0) + 1
    for factor_id in FACTOR_ORDER:
        if factor_id not in seen:
            report.add(factor_id, "", "missing-factor", f"factor {factor_id!r} is absent")
    for factor_id, count in seen.items():
        if factor_id not in FACTOR_ORDER:
            report.add(factor_id, "", "unknown-factor-id", f"{factor_id!r} is not a rubric factor")
        elif count > 1:
            report.add(factor_id, "", "duplicate-factor", f"factor {factor_id!r} appears {count} times")

    actual_order = [f.id for f in rubric.factors]
    expected_order = [fid for fid in FACTOR_ORDER if fid in seen]
    if all(fid in FACTOR_ORDER for fid in actual_order) and len(actual_order) == len(set(actual_order)):
        if actual_order != expected_order:
            report.add("", "", "factor-order", "factors are not in canonical order")

    for f in rubric.factors:
        ids: set[str] = set()
        ranks: set[int] = set()
        for option in f.categories:
            if option.id in ids:
                report.add(f.id, option.id, "duplicate-category-id", f"category id {option.id!r} repeated in factor {f.id!r}")
            ids.add(option.id)
            if option.rank in ranks:
                report.add(f.id, option.id, "duplicate-rank", f"rank {option.rank} repeated in factor {f.id!r}")
            ranks.add(option.rank)
            if option.rank < 1:
                report.add(f.id, option.id, "invalid-rank", f"rank must be >= 1, got {option.rank}")
            if option.provenance not in PROVENANCE_VALUES:
                report.add(f.id, option.id, "invalid-provenance", f"unknown provenance {option.provenance!r}")
            elif option.provenance == "paper-table":
                expected = PAPER_TABLE_PAIRS.get((f.id, option.id))
                if expected is None:
                    report.add(f.id, option.id, "paper-table-unsupported", f"({f.id}, {option.id}) is not readable from a published table")
                elif int(option.severity) != expected:
                    report.add(f.id, option.id, "paper-table-severity-mismatch", f"published severity is {expected}, rubric has {int(option.severity)}")

        by_rank = sorted(f.categories, key=lambda o: o.rank)
        if list(f.categories) != by_rank:
            report.add(f.id, "", "category-order", f"categories of {f.id!r} are not listed in ascending rank order")
        last = 0
        for option in by_rank:
            if int(option.severity) < last:
                report.add(f.id, option.id, "severity-monotonicity", f"severity decreases at rank {option.rank} of factor {f.id!r}")
            last = int(option.severity)

    return report


def rubric_from_dict(data: dict) -> Rubric:
    """Permissive construction from the file schema: structural/type errors
    raise, invariant violations are left for validate_rubric to report."""
    if not isinstance(data, dict):
        raise ParseError("rubric document must be a JSON object")
    version = data.get("version")
    factors_raw = data.get("factors")
    if not isinstance(version, str) or not isinstance(factors_raw, list):
        raise SchemaError('rubric document needs "version" string and "factors" list')

    factors = []
    for fdata in factors_raw:
        if not isinstance(fdata, dict):
            raise SchemaError("factor entries must be objects")
        categories = []
        for cdata in fdata.get("categories", []):
            if not isinstance(cdata, dict):
                raise SchemaError("category entries must be objects")
            try:
                rank = int(cdata["rank"])
                severity = Severity.from_value(int(cdata["severity"]))
                categories.append(
                    CategoryOption(
                        id=str(cdata["id"]),
                        display_text=str(cdata["display_text"]),
                        rank=rank,
                        severity=severity,
                        provenance=str(cdata["provenance"]),
                    )
                )
            except KeyError as exc:
                raise SchemaError(f"category missing field {exc.args[0]!r}") from None
            except (TypeError, ValueError):
                raise SchemaError("category rank/severity must be integers") from None
        try:
            factors.append(
                Factor(
                    id=str(fdata["id"]),
                    display_name=str(fdata["display_name"]),
                    categories=tuple(categories),
                )
            )
        except KeyError as exc:
            raise SchemaError(f"factor missing field {exc.args[0]!r}") from None
    return Rubric(version=version, factors=tuple(factors))


def rubric_to_dict(rubric: Rubric) -> dict:
    return {
        "version": rubric.version,
        "factors": [
            {
                "id": f.id,
                "display_name": f.display_name,
                "categories": [
                    {
                        "id": option.id,
                        "display_text": option.display_text,
                        "rank": option.rank,
                        "severity": int(option.severity),
                        "provenance": option.provenance,
                    }
                    for option in f.categories
                ],
            }
            for f in rubric.factors
        ],
    }


def dump_rubric(rubric: Rubric) -> bytes:
    """Canonical UTF-8 JSON encoding; load(dump(r)) == r and dump(load(b)) == b
    for documents produced by this function."""
    return (json.dumps(rubric_to_dict(rubric), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def load_rubric(document: bytes | str) -> Rubric:
    """Parse and validate a rubric document.

    Raises parse-error for malformed JSON, schema-error for missing or
    duplicated factors/categories, monotonicity-error when severity
    decreases with rank.
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"rubric document is not UTF-8: {exc}") from None
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"rubric document is not valid JSON: {exc}") from None

    rubric = rubric_from_dict(data)
    report = validate_rubric(rubric)
    if not report.ok:
        monotonicity = [f for f in report.findings if f.rule == "severity-monotonicity"]
        if monotonicity:
            raise MonotonicityError(monotonicity[0].message)
        first = report.findings[0]
        raise SchemaError(f"invalid rubric: {first.rule}: {first.message}")
    return rubric
