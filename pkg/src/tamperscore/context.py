"""Environment model and context-sensitive category suggestion rules.

An EnvironmentProfile captures the system state an assessment is performed
against: who the acting user is, which edit-capable software is installed,
which executions of it were observed, and the encryption situation.
suggest_assignments() derives one category per factor for a source, as a
pure function of (profile, source, rubric).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

from .errors import (
    ParseError,
    SchemaError,
    UnknownEncryptionDeclarationError,
    UnknownProtectionLevelError,
)
from .rubric import Rubric

if TYPE_CHECKING:
    from .knowledge_base import SourceDefinition

PRIVILEGE_LEVELS = ("admin-with-uac", "standard-user", "standard-user-with-privesc-facets")
VOLUME_ENCRYPTION_VALUES = ("none", "full-disk-live", "file-based-live")
PROTECTION_LEVELS = ("user", "admin", "admin-prompt", "system-protected")
EDIT_MODES = ("ui", "hex")
SPECIFICITY_VALUES = ("ran", "accessed-source-class", "accessed-specific-source")

# Documented closed set of profile setting flags.
KNOWN_SETTING_FLAGS = ("show-hidden-files", "vss-mounted", "offdevice-key-available")

# edit-software categories by ascending concern; suggestion picks the
# most concerning category any applicable tool reaches.
_TOOL_CATEGORY_RANK = {
    "not-on-system": 1,
    "default-hex-tool": 2,
    "added-hex-tool": 3,
    "added-ui-tool": 4,
    "default-ui-tool": 5,
}

_FACET_CATEGORY_RANK = {
    "no-observed-facets": 1,
    "software-run": 2,
    "software-accessed-source": 3,
    "software-accessed-specific-source": 4,
}


@dataclass(frozen=True)
class SoftwareCapability:
    """One piece of software and what it can edit.

    edit_targets names source classes; excluded_sources lists individual
    source ids within those classes the tool cannot actually touch (e.g.
    a timestomping tool that rewrites SIA but never FN timestamps).
    """

    software_id: str
    edit_targets: frozenset[str]
    edit_mode: str
    default_on_os: bool
    excluded_sources: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.edit_mode not in EDIT_MODES:
            raise SchemaError(f"edit_mode must be one of {EDIT_MODES}, got {self.edit_mode!r}")

    def can_edit(self, source: "SourceDefinition") -> bool:
        return source.source_class in self.edit_targets and source.id not in self.excluded_sources


@dataclass(frozen=True)
class ObservedExecution:
    software_id: str
    specificity: str
    target_source: str | None = None

    def __post_init__(self):
        if self.specificity not in SPECIFICITY_VALUES:
            raise SchemaError(f"specificity must be one of {SPECIFICITY_VALUES}, got {self.specificity!r}")
        if (self.target_source is not None) != (self.specificity == "accessed-specific-source"):
            raise SchemaError("target_source is required exactly when specificity is accessed-specific-source")


@dataclass(frozen=True)
class EnvironmentProfile:
    os_family: str
    user_privilege: str
    installed_software: tuple[SoftwareCapability, ...] = ()
    execution_facets: tuple[ObservedExecution, ...] = ()
    volume_encryption: str = "none"
    setting_flags: dict[str, bool] = field(default_factory=dict)
    # per-source baseline_protection overrides, keyed by source id
    protection_overrides: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.user_privilege not in PRIVILEGE_LEVELS:
            raise SchemaError(f"user_privilege must be one of {PRIVILEGE_LEVELS}, got {self.user_privilege!r}")
        if self.volume_encryption not in VOLUME_ENCRYPTION_VALUES:
            raise SchemaError(f"volume_encryption must be one of {VOLUME_ENCRYPTION_VALUES}, got {self.volume_encryption!r}")
        for flag in self.setting_flags:
            if flag not in KNOWN_SETTING_FLAGS:
                raise SchemaError(f"unknown setting flag {flag!r}; known flags: {KNOWN_SETTING_FLAGS}")
        for level in self.protection_overrides.values():
            if level not in PROTECTION_LEVELS:
                raise UnknownProtectionLevelError(f"protection override {level!r} is not one of {PROTECTION_LEVELS}")


@dataclass(frozen=True)
class FactorAssignment:
    """One category choice for one factor, with its origin and reasoning."""

    factor: str
    category: str
    provenance: str  # suggested | manual | manual-override-of-suggestion
    rationale: str


def derive_permission_category(profile: EnvironmentProfile, source: "SourceDefinition") -> str:
    """Apply the privilege rules to the source's baseline protection level.

    An admin behind UAC reaches prompt-protected sources (the prompt is not
    a barrier); observed privilege-escalation facets make otherwise
    protected sources reachable; a plain standard user does not get past
    any protected baseline.
    """
    baseline = profile.protection_overrides.get(source.id, source.baseline_protection)
    if baseline not in PROTECTION_LEVELS:
        raise UnknownProtectionLevelError(
            f"source {source.id!r} declares protection level {baseline!r}, expected one of {PROTECTION_LEVELS}"
        )
    if baseline == "user":
        return "user-accessible"
    if profile.user_privilege == "admin-with-uac":
        if baseline == "admin":
            return "user-accessible"
        if baseline == "admin-prompt":
            return "accessible-with-prompt"
        return "user-inaccessible"
    if profile.user_privilege == "standard-user-with-privesc-facets":
        return "inaccessible-with-privesc-facets"
    return "user-inaccessible"


def derive_encryption_category(profile: EnvironmentProfile, source: "SourceDefinition") -> str:
    """Map the source's encryption declaration to an encryption category.

    An unencrypted source is no-encryption even under live transparent
    volume encryption (while the system runs, the volume layer is not a
    tampering barrier); an individually encrypted source is governed by
    where its key lives.
    """
    decl = source.encryption_declaration
    kind = decl.kind
    if kind == "none":
        return "no-encryption"
    if kind == "trivial":
        return "trivial-encryption"
    if kind == "transparent-os":
        return "accessible-live"
    if kind == "encrypted":
        if decl.key_location == "local":
            return "key-recoverable-local"
        if decl.key_location == "off-device":
            if profile.setting_flags.get("offdevice-key-available", False):
                return "key-offdevice-available"
            return "key-offdevice-unavailable"
    raise UnknownEncryptionDeclarationError(
        f"source {source.id!r} has encryption declaration kind {kind!r}"
    )


def _applicable_tools(profile: EnvironmentProfile, source: "SourceDefinition") -> list[SoftwareCapability]:
    return [cap for cap in profile.installed_software if cap.can_edit(source)]


def _edit_software_suggestion(tools: Iterable[SoftwareCapability]) -> tuple[str, str]:
    best: tuple[int, str, SoftwareCapability] | None = None
    for cap in tools:
        if cap.edit_mode == "ui":
            category = "default-ui-tool" if cap.default_on_os else "added-ui-tool"
        else:
            category = "added-hex-tool" if not cap.default_on_os else "default-hex-tool"
        rank = _TOOL_CATEGORY_RANK[category]
        if best is None or rank > best[0]:
            best = (rank, category, cap)
    if best is None:
        return "not-on-system", "no installed software can edit this facet"
    _, category, cap = best
    origin = "available by default" if cap.default_on_os else "added to this system"
    return category, f"{cap.software_id!r} ({cap.edit_mode} editing, {origin}) can edit this facet"


def _access_facets_suggestion(
    profile: EnvironmentProfile, source: "SourceDefinition", tools: list[SoftwareCapability]
) -> tuple[str, str]:
    capable_ids = {cap.software_id for cap in tools}
    best: tuple[int, str, str] | None = None
    for execution in profile.execution_facets:
        if execution.software_id not in capable_ids:
            continue
        if execution.specificity == "accessed-specific-source" and execution.target_source == source.id:
            category = "software-accessed-specific-source"
            why = f"{execution.software_id!r} observed accessing this specific source"
        elif execution.specificity == "accessed-source-class":
            category = "software-accessed-source"
            why = f"{execution.software_id!r} observed accessing sources of this class"
        else:
            # a specific access to a different source still shows the tool ran
            category = "software-run"
            why = f"{execution.software_id!r} observed being run"
        rank = _FACET_CATEGORY_RANK[category]
        if best is None or rank > best[0]:
            best = (rank, category, why)
    if best is None:
        return "no-observed-facets", "no observed access by edit-capable software"
    return best[1], best[2]


def _visibility_suggestion(profile: EnvironmentProfile, source: "SourceDefinition") -> tuple[str, str]:
    for rule in source.visibility_rule.rules:
        if rule.when_privilege and profile.user_privilege not in rule.when_privilege:
            continue
        if rule.when_flag and any(
            profile.setting_flags.get(flag, False) != wanted for flag, wanted in rule.when_flag
        ):
            continue
        conditions = []
        if rule.when_privilege:
            conditions.append(f"privilege in {sorted(rule.when_privilege)}")
        if rule.when_flag:
            conditions.append(f"flags {dict(rule.when_flag)}")
        return rule.category, "visibility condition matched: " + "; ".join(conditions)
    return source.visibility_rule.default, "default visibility for this source"


def suggest_assignments(
    profile: EnvironmentProfile, source: "SourceDefinition", rubric: Rubric
) -> list[FactorAssignment]:
    """Derive one suggested FactorAssignment per factor, in canonical order.

    Pure function: identical inputs yield identical outputs. Every
    suggestion carries provenance "suggested" and a rationale naming the
    rule that fired. Tool applicability is facet-specific: software that
    cannot edit this particular facet counts as not-on-system here.
    """
    tools = _applicable_tools(profile, source)

    visibility_cat, visibility_why = _visibility_suggestion(profile, source)
    permission_cat = derive_permission_category(profile, source)
    edit_cat, edit_why = _edit_software_suggestion(tools)
    facets_cat, facets_why = _access_facets_suggestion(profile, source, tools)
    encryption_cat = derive_encryption_category(profile, source)

    if edit_cat in ("added-ui-tool", "default-ui-tool") and source.ui_tool_masks_format:
        format_cat = "na-ui-tool"
        format_why = "UI editing available, low-level format is not relevant"
    else:
        format_cat = source.intrinsic_format
        format_why = "intrinsic format of the source"

    suggestions = [
        ("visibility", visibility_cat, visibility_why),
        ("permissions", permission_cat, f"privilege rule for {profile.user_privilege!r} against baseline protection"),
        ("edit-software", edit_cat, edit_why),
        ("access-facets", facets_cat, facets_why),
        ("encryption", encryption_cat, "encryption declaration of the source under this profile"),
        ("file-format", format_cat, format_why),
        ("organization", source.intrinsic_organization, "intrinsic organization of the source"),
    ]

    assignments = []
    for factor_id, category, why in suggestions:
        rubric.factor(factor_id).category(category)  # fail fast on a dangling reference
        assignments.append(
            FactorAssignment(factor=factor_id, category=category, provenance="suggested", rationale=why)
        )
    return assignments


# ---------------------------------------------------------------------------
# Profile (de)serialization
# ---------------------------------------------------------------------------

def capability_from_dict(data: dict) -> SoftwareCapability:
    try:
        return SoftwareCapability(
            software_id=str(data["software_id"]),
            edit_targets=frozenset(str(t) for t in data["edit_targets"]),
            edit_mode=str(data["edit_mode"]),
            default_on_os=bool(data["default_on_os"]),
            excluded_sources=frozenset(str(s) for s in data.get("excluded_sources", [])),
        )
    except KeyError as exc:
        raise SchemaError(f"software capability missing field {exc.args[0]!r}") from None


def capability_to_dict(cap: SoftwareCapability) -> dict:
    data = {
        "software_id": cap.software_id,
        "edit_targets": sorted(cap.edit_targets),
        "edit_mode": cap.edit_mode,
        "default_on_os": cap.default_on_os,
    }
    if cap.excluded_sources:
        data["excluded_sources"] = sorted(cap.excluded_sources)
    return data


def execution_from_dict(data: dict) -> ObservedExecution:
    try:
        return ObservedExecution(
            software_id=str(data["software_id"]),
            specificity=str(data["specificity"]),
            target_source=data.get("target_source"),
        )
    except KeyError as exc:
        raise SchemaError(f"observed execution missing field {exc.args[0]!r}") from None


def execution_to_dict(execution: ObservedExecution) -> dict:
    data = {"software_id": execution.software_id, "specificity": execution.specificity}
    if execution.target_source is not None:
        data["target_source"] = execution.target_source
    return data


def profile_from_dict(data: dict) -> EnvironmentProfile:
    if not isinstance(data, dict):
        raise ParseError("profile document must be a JSON object")
    try:
        return EnvironmentProfile(
            os_family=str(data["os_family"]),
            user_privilege=str(data["user_privilege"]),
            installed_software=tuple(capability_from_dict(c) for c in data.get("installed_software", [])),
            execution_facets=tuple(execution_from_dict(e) for e in data.get("execution_facets", [])),
            volume_encryption=str(data.get("volume_encryption", "none")),
            setting_flags={str(k): bool(v) for k, v in data.get("setting_flags", {}).items()},
            protection_overrides={str(k): str(v) for k, v in data.get("protection_overrides", {}).items()},
        )
    except KeyError as exc:
        raise SchemaError(f"profile missing field {exc.args[0]!r}") from None


def profile_to_dict(profile: EnvironmentProfile) -> dict:
    data = {
        "os_family": profile.os_family,
        "user_privilege": profile.user_privilege,
        "installed_software": [capability_to_dict(c) for c in profile.installed_software],
        "execution_facets": [execution_to_dict(e) for e in profile.execution_facets],
        "volume_encryption": profile.volume_encryption,
        "setting_flags": dict(profile.setting_flags),
    }
    if profile.protection_overrides:
        data["protection_overrides"] = dict(profile.protection_overrides)
    return data


def load_profile(document: bytes | str) -> EnvironmentProfile:
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"profile document is not UTF-8: {exc}") from None
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"profile document is not valid JSON: {exc}") from None
    return profile_from_dict(data)


def dump_profile(profile: EnvironmentProfile) -> bytes:
    return (json.dumps(profile_to_dict(profile), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
