"""Exception hierarchy. Every error carries a stable slug in `name`;
the CLI and the HTTP API surface that slug verbatim."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""

    name = "engine-error"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.name)
        self.detail = detail or self.name


class ParseError(EngineError):
    name = "parse-error"


class SchemaError(EngineError):
    name = "schema-error"


class MonotonicityError(EngineError):
    name = "monotonicity-error"


class UnknownFactorError(EngineError):
    name = "unknown-factor"


class UnknownCategoryError(EngineError):
    name = "unknown-category"


class UnknownProtectionLevelError(EngineError):
    name = "unknown-protection-level"


class UnknownEncryptionDeclarationError(EngineError):
    name = "unknown-encryption-declaration"


class DanglingCategoryReferenceError(EngineError):
    name = "dangling-category-reference"


class DuplicateSourceIdError(EngineError):
    name = "duplicate-source-id"


class NotFoundError(EngineError):
    name = "not-found"


class UnknownSourceError(EngineError):
    name = "unknown-source"


class InvalidCategoryForFactorError(EngineError):
    name = "invalid-category-for-factor"


class IncompleteAssessmentError(EngineError):
    name = "incomplete-assessment"

    def __init__(self, detail: str = "", missing: dict[str, list[str]] | None = None):
        super().__init__(detail)
        # source id -> factor ids still unassigned
        self.missing = missing or {}


class EmptySourceSetError(EngineError):
    name = "empty-source-set"


class RubricVersionMismatchError(EngineError):
    name = "rubric-version-mismatch"


class UnreadableFileError(EngineError):
    name = "unreadable-file"


class MissingRequiredColumnError(EngineError):
    name = "missing-required-column"


class DanglingMappingTargetError(EngineError):
    name = "dangling-mapping-target"


class UnknownFormatError(EngineError):
    name = "unknown-format"


class InvalidConfigError(EngineError):
    name = "invalid-config"
