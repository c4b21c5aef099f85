import pytest

from tamperscore.assessment import (
    assign_category,
    cscale_advisory,
    document_to_dict,
    dump_document,
    load_document,
    new_assessment,
    rank_sources,
    replay_audit,
    score_vector,
    weakness_summary,
    whatif_diff,
)
from tamperscore.errors import (
    EmptySourceSetError,
    IncompleteAssessmentError,
    InvalidCategoryForFactorError,
    RubricVersionMismatchError,
    SchemaError,
    UnknownSourceError,
)
from tamperscore.rubric import FACTOR_ORDER

USB_SOURCES = ["setupapi-dev-log", "usbstor-key", "mounteddevices-key", "windows-event-logs"]

# Printed severity vectors of the USB home-admin case, in canonical factor
# order; the independent input for the ranking oracle below.
PRINTED_USB_SCORES = {
    "setupapi-dev-log": [3, 3, 3, 2, 3, 3, 2],
    "usbstor-key": [3, 3, 3, 1, 3, 3, 2],
    "mounteddevices-key": [3, 3, 3, 1, 3, 2, 2],
    "windows-event-logs": [3, 3, 1, 1, 3, 2, 2],
}


def brute_force_order(vectors: dict) -> list[str]:
    """Oracle: descending-sorted severity profiles compared ascending."""
    return [
        source
        for _, source in sorted((tuple(sorted(v, reverse=True)), s) for s, v in vectors.items())
    ]


@pytest.fixture()
def usb_doc(rubric, kb, home_profile):
    return new_assessment("USB connection", rubric, home_profile, kb, USB_SOURCES, doc_id="usbdoc")


@pytest.fixture()
def timestomp_doc(rubric, kb, timestomp_profile):
    return new_assessment(
        "File creation with timestomp", rubric, timestomp_profile, kb,
        ["mft-sia-created", "mft-fn-created"], doc_id="stompdoc",
    )


# -- creation ----------------------------------------------------------------

def test_new_assessment_prepopulates_suggestions(usb_doc):
    assert [a.source for a in usb_doc.source_assessments] == USB_SOURCES
    for assessment in usb_doc.source_assessments:
        assert assessment.complete
        assert all(a.provenance == "suggested" for a in assessment.assignments)
    assert len(usb_doc.audit_log) == 1
    assert usb_doc.audit_log[0].change["op"] == "create"


def test_new_assessment_matches_printed_usb_scores(usb_doc, rubric):
    for source, printed in PRINTED_USB_SCORES.items():
        assert [int(s) for s in score_vector(usb_doc, source, rubric)] == printed


def test_new_assessment_empty_source_list(rubric, kb, home_profile):
    doc = new_assessment("empty", rubric, home_profile, kb, [])
    assert doc.source_assessments == []
    assert len(doc.audit_log) == 1


def test_new_assessment_unknown_source(rubric, kb, home_profile):
    with pytest.raises(UnknownSourceError):
        new_assessment("bad", rubric, home_profile, kb, ["setupapi-dev-log", "bogus"])


# -- assignment --------------------------------------------------------------

def test_manual_override_changes_severity(timestomp_doc, rubric, kb):
    fn = timestomp_doc.assessment_for("mft-fn-created")
    assert fn.assignment_for("edit-software").category == "not-on-system"
    assign_category(
        timestomp_doc, "mft-fn-created", "edit-software", "added-ui-tool",
        "kernel-level FN editor found on disk", rubric,
    )
    updated = fn.assignment_for("edit-software")
    assert updated.category == "added-ui-tool"
    assert updated.provenance == "manual-override-of-suggestion"
    vector = [int(s) for s in score_vector(timestomp_doc, "mft-fn-created", rubric)]
    assert vector[list(FACTOR_ORDER).index("edit-software")] == 3


def test_reassigning_same_category_is_noop_with_audit(usb_doc, rubric):
    before = usb_doc.assessment_for("usbstor-key").assignment_for("visibility")
    log_length = len(usb_doc.audit_log)
    assign_category(usb_doc, "usbstor-key", "visibility", before.category, "same again", rubric)
    after = usb_doc.assessment_for("usbstor-key").assignment_for("visibility")
    assert after == before
    assert len(usb_doc.audit_log) == log_length + 1
    assert usb_doc.audit_log[-1].change["applied"] is False


def test_manual_over_manual_stays_manual(usb_doc, rubric):
    assign_category(usb_doc, "usbstor-key", "visibility", "other-ui-visible", "first", rubric)
    assign_category(usb_doc, "usbstor-key", "visibility", "cannot-be-made-visible", "second", rubric)
    assert usb_doc.assessment_for("usbstor-key").assignment_for("visibility").provenance == "manual"


def test_assign_wrong_factor_category(usb_doc, rubric):
    with pytest.raises(InvalidCategoryForFactorError):
        assign_category(usb_doc, "usbstor-key", "visibility", "no-encryption", "", rubric)


def test_assign_unknown_source(usb_doc, rubric):
    with pytest.raises(UnknownSourceError):
        assign_category(usb_doc, "bogus", "visibility", "gui-visible", "", rubric)


def test_audit_log_grows_with_every_mutation(usb_doc, rubric):
    lengths = [len(usb_doc.audit_log)]
    assign_category(usb_doc, "usbstor-key", "visibility", "other-ui-visible", "a", rubric)
    lengths.append(len(usb_doc.audit_log))
    assign_category(usb_doc, "usbstor-key", "visibility", "other-ui-visible", "b", rubric)
    lengths.append(len(usb_doc.audit_log))
    assert lengths == sorted(lengths) and len(set(lengths)) == len(lengths)


# -- scoring -----------------------------------------------------------------

def test_timestomp_score_vectors(timestomp_doc, rubric):
    assert [int(s) for s in score_vector(timestomp_doc, "mft-sia-created", rubric)] == [1, 1, 3, 2, 3, 3, 2]
    assert [int(s) for s in score_vector(timestomp_doc, "mft-fn-created", rubric)] == [1, 1, 1, 1, 3, 2, 2]


def test_incomplete_assessment_names_missing_factors(usb_doc, rubric):
    assessment = usb_doc.assessment_for("usbstor-key")
    assessment.assignments = [a for a in assessment.assignments if a.factor not in ("encryption", "organization")]
    with pytest.raises(IncompleteAssessmentError) as excinfo:
        score_vector(usb_doc, "usbstor-key", rubric)
    assert excinfo.value.missing == {"usbstor-key": ["encryption", "organization"]}


def test_score_requires_matching_rubric_version(usb_doc, rubric):
    usb_doc.rubric_version = "0.9.0"
    with pytest.raises(RubricVersionMismatchError):
        score_vector(usb_doc, "usbstor-key", rubric)


# -- ranking -----------------------------------------------------------------

def test_usb_rank_matches_brute_force_oracle(usb_doc, rubric):
    expected_order = brute_force_order(PRINTED_USB_SCORES)
    assert expected_order[0] == "windows-event-logs"
    ranked = rank_sources(usb_doc, rubric)
    assert [r.source for r in ranked] == expected_order
    assert ranked[0].profile == (3, 3, 3, 2, 2, 1, 1)
    assert [r.rank for r in ranked] == [1, 2, 3, 4]


def test_timestomp_rank_fn_most_resistant(timestomp_doc, rubric):
    ranked = rank_sources(timestomp_doc, rubric)
    assert [r.source for r in ranked] == ["mft-fn-created", "mft-sia-created"]


def test_rank_is_input_order_invariant(rubric, kb, home_profile):
    forward = new_assessment("a", rubric, home_profile, kb, USB_SOURCES)
    backward = new_assessment("b", rubric, home_profile, kb, list(reversed(USB_SOURCES)))
    assert [(r.rank, r.source, r.profile) for r in rank_sources(forward, rubric)] == [
        (r.rank, r.source, r.profile) for r in rank_sources(backward, rubric)
    ]


def test_identical_vectors_tie(rubric, kb, corporate_profile):
    doc = new_assessment("corp", rubric, corporate_profile, kb, ["usbstor-key", "windows-event-logs"])
    ranked = rank_sources(doc, rubric)
    assert ranked[0].rank == ranked[1].rank == 1
    assert ranked[0].profile == ranked[1].profile


def test_rank_rejects_incomplete(usb_doc, rubric):
    usb_doc.assessment_for("usbstor-key").assignments.pop()
    with pytest.raises(IncompleteAssessmentError):
        rank_sources(usb_doc, rubric)


# -- weaknesses and cscale ---------------------------------------------------

def test_weakness_summaries(timestomp_doc, usb_doc, rubric):
    assert weakness_summary(timestomp_doc, "mft-fn-created", rubric) == ["encryption"]
    assert weakness_summary(usb_doc, "setupapi-dev-log", rubric) == [
        "visibility", "permissions", "edit-software", "encryption", "file-format",
    ]


def test_weakness_summary_can_be_empty(rubric, kb, corporate_profile):
    doc = new_assessment("corp", rubric, corporate_profile, kb, ["usbstor-key"])
    for factor, category in [("encryption", "key-offdevice-unavailable")]:
        assign_category(doc, "usbstor-key", factor, category, "synthetic", rubric)
    assert weakness_summary(doc, "usbstor-key", rubric) == []


def test_cscale_single_resistant_source(timestomp_doc, rubric):
    advisory = cscale_advisory(timestomp_doc, rubric, ["mft-fn-created"])
    assert advisory.resistant_count == 1
    assert advisory.non_resistant_count == 0
    assert advisory.advisory_text.startswith("ADVISORY")
    assert "investigator" in advisory.advisory_text


def test_cscale_single_weak_source_references_c2(usb_doc, rubric):
    advisory = cscale_advisory(usb_doc, rubric, ["setupapi-dev-log"])
    assert advisory.resistant_count == 0
    assert advisory.non_resistant_count == 1
    assert "C2" in advisory.advisory_text
    assert "only one source of evidence that is not difficult to tamper with" in advisory.advisory_text


def test_cscale_threshold_is_configurable(usb_doc, rubric):
    strict = cscale_advisory(usb_doc, rubric, ["setupapi-dev-log"], threshold=0)
    lax = cscale_advisory(usb_doc, rubric, ["setupapi-dev-log"], threshold=7)
    assert strict.resistant_count == 0
    assert lax.resistant_count == 1


def test_cscale_empty_source_set(usb_doc, rubric):
    with pytest.raises(EmptySourceSetError):
        cscale_advisory(usb_doc, rubric, [])


# -- what-if -----------------------------------------------------------------

def test_whatif_identity_profile_is_empty(usb_doc, rubric, kb, home_profile):
    diff = whatif_diff(usb_doc, home_profile, kb, rubric)
    assert diff.entries == ()


def test_whatif_home_to_corporate(usb_doc, rubric, kb, corporate_profile):
    diff = whatif_diff(usb_doc, corporate_profile, kb, rubric)
    by_cell = {(e.source, e.factor): e for e in diff.entries}

    usbstor_permissions = by_cell[("usbstor-key", "permissions")]
    assert (usbstor_permissions.old_severity, usbstor_permissions.new_severity) == (3, 1)
    usbstor_edit = by_cell[("usbstor-key", "edit-software")]
    assert (usbstor_edit.old_severity, usbstor_edit.new_severity) == (3, 1)
    usbstor_visibility = by_cell[("usbstor-key", "visibility")]
    assert (usbstor_visibility.old_severity, usbstor_visibility.new_severity) == (3, 1)

    # encryption is environment-independent here: no diff rows at all
    assert not any(factor == "encryption" for _, factor in by_cell)
    # the document itself is untouched
    assert usb_doc.assessment_for("usbstor-key").assignment_for("permissions").category == "accessible-with-prompt"


def test_whatif_flags_manual_assignments(usb_doc, rubric, kb, corporate_profile):
    assign_category(usb_doc, "usbstor-key", "permissions", "user-accessible", "seen written by user", rubric)
    diff = whatif_diff(usb_doc, corporate_profile, kb, rubric)
    cell = next(e for e in diff.entries if e.source == "usbstor-key" and e.factor == "permissions")
    assert cell.manual_review
    assert cell.note == "manual — review required"
    assert cell.old_category == "user-accessible"


# -- persistence and replay --------------------------------------------------

def test_document_round_trip_bytes(usb_doc, rubric):
    assign_category(usb_doc, "usbstor-key", "visibility", "other-ui-visible", "terminal check", rubric)
    blob = dump_document(usb_doc)
    again = load_document(blob)
    assert again == usb_doc
    assert dump_document(again) == blob


def test_audit_replay_reproduces_document(usb_doc, rubric, kb):
    assign_category(usb_doc, "usbstor-key", "visibility", "other-ui-visible", "a", rubric)
    assign_category(usb_doc, "setupapi-dev-log", "permissions", "user-inaccessible", "b", rubric, actor="reviewer")
    assign_category(usb_doc, "usbstor-key", "visibility", "other-ui-visible", "noop", rubric)
    replayed = replay_audit(usb_doc, kb, rubric)
    assert replayed == usb_doc
    assert document_to_dict(replayed) == document_to_dict(usb_doc)


def test_scores_stable_across_rereads(usb_doc, rubric):
    first = [int(s) for s in score_vector(usb_doc, "usbstor-key", rubric)]
    reloaded = load_document(dump_document(usb_doc))
    second = [int(s) for s in score_vector(reloaded, "usbstor-key", rubric)]
    assert first == second


def test_replay_requires_creation_entry(usb_doc, rubric, kb):
    usb_doc.audit_log = usb_doc.audit_log[1:]
    with pytest.raises(SchemaError):
        replay_audit(usb_doc, kb, rubric)
