"""Tamper-resistance assessment engine for digital forensic timeline sources."""

from .assessment import (
    AssessmentDocument,
    AuditEntry,
    CScaleAdvisory,
    RankedSource,
    SourceAssessment,
    WhatIfCellDiff,
    WhatIfDiff,
    assign_category,
    cscale_advisory,
    dump_document,
    load_document,
    new_assessment,
    rank_sources,
    replay_audit,
    score_vector,
    weakness_summary,
    whatif_diff,
)
from .context import (
    EnvironmentProfile,
    FactorAssignment,
    ObservedExecution,
    SoftwareCapability,
    derive_encryption_category,
    derive_permission_category,
    dump_profile,
    load_profile,
    suggest_assignments,
)
from .defaults import default_kb, default_mapping, default_rubric, shipped_profiles
from .errors import EngineError
from .ingest import group_sources, map_to_kb, parse_timeline
from .knowledge_base import (
    KnowledgeBase,
    SourceDefinition,
    dump_kb,
    load_kb,
    lookup_source,
    validate_kb,
)
from .report import RenderedReport, render, render_diff
from .rubric import (
    FACTOR_ORDER,
    CategoryOption,
    Factor,
    Rubric,
    Severity,
    dump_rubric,
    load_rubric,
    severity_of,
    validate_rubric,
)

__version__ = "0.1.0"
