// Pure view-state logic for the assessment workspace. Severities are
// looked up in service-provided data (the fetched rubric, PUT responses,
// what-if payloads); nothing here computes a score.

import type {
  AssessmentDocument,
  AssignmentResponse,
  CategoryOption,
  Rubric,
  WhatIfDiff,
  WhatIfEntry,
} from "./types.js";

export interface AssessmentView {
  document: AssessmentDocument;
  rubric: Rubric;
  dirty: ReadonlySet<string>;
  overlay: WhatIfDiff | null;
  banner: string | null;
}

export function cellId(source: string, factor: string): string {
  return `${source}/${factor}`;
}

export function newView(document: AssessmentDocument, rubric: Rubric): AssessmentView {
  return { document, rubric, dirty: new Set(), overlay: null, banner: null };
}

export function factorOptions(view: AssessmentView, factorId: string): CategoryOption[] {
  const factor = view.rubric.factors.find((f) => f.id === factorId);
  if (!factor) {
    throw new Error(`factor ${factorId} not in rubric ${view.rubric.version}`);
  }
  return factor.categories;
}

export function categorySeverity(view: AssessmentView, factorId: string, categoryId: string): number {
  const option = factorOptions(view, factorId).find((c) => c.id === categoryId);
  if (!option) {
    throw new Error(`category ${categoryId} not an option of ${factorId}`);
  }
  return option.severity;
}

export function currentCategory(view: AssessmentView, source: string, factor: string): string | null {
  const assessment = view.document.source_assessments.find((s) => s.source === source);
  const assignment = assessment?.assignments.find((a) => a.factor === factor);
  return assignment ? assignment.category : null;
}

export function currentProvenance(view: AssessmentView, source: string, factor: string): string | null {
  const assessment = view.document.source_assessments.find((s) => s.source === source);
  const assignment = assessment?.assignments.find((a) => a.factor === factor);
  return assignment ? assignment.provenance : null;
}

// Re-selecting the assigned category must not touch the network.
export function editNeedsRequest(view: AssessmentView, source: string, factor: string, category: string): boolean {
  return currentCategory(view, source, factor) !== category;
}

export function markDirty(view: AssessmentView, source: string, factor: string): AssessmentView {
  const dirty = new Set(view.dirty);
  dirty.add(cellId(source, factor));
  return { ...view, dirty };
}

// Successful save: adopt the returned document snapshot, clear the cell's
// dirty mark, drop any banner. The caller recolors per response.severity.
export function applyEditSuccess(view: AssessmentView, response: AssignmentResponse): AssessmentView {
  const dirty = new Set(view.dirty);
  dirty.delete(cellId(response.source, response.factor));
  return { ...view, document: response.document, dirty, banner: null };
}

// Failed save: the document snapshot stays as it was (the select reverts
// to currentCategory), the banner carries the service's error name.
export function applyEditFailure(view: AssessmentView, source: string, factor: string, errorName: string): AssessmentView {
  const dirty = new Set(view.dirty);
  dirty.delete(cellId(source, factor));
  return { ...view, dirty, banner: errorName };
}

export function setOverlay(view: AssessmentView, diff: WhatIfDiff): AssessmentView {
  return { ...view, overlay: diff };
}

export function discardOverlay(view: AssessmentView): AssessmentView {
  return { ...view, overlay: null };
}

export interface OverlayBadge {
  oldCategory: string;
  newCategory: string;
  oldSeverity: number;
  newSeverity: number;
}

// Old -> new severity badges for every changed cell in the active overlay.
export function overlayBadges(view: AssessmentView): Map<string, OverlayBadge> {
  const badges = new Map<string, OverlayBadge>();
  for (const entry of view.overlay?.entries ?? []) {
    badges.set(cellId(entry.source, entry.factor), {
      oldCategory: entry.old_category,
      newCategory: entry.new_category,
      oldSeverity: entry.old_severity,
      newSeverity: entry.new_severity,
    });
  }
  return badges;
}

// Applying an overlay only ever replaces suggested assignments; cells the
// investigator set manually are listed for review instead.
export function overlayApplyPlan(view: AssessmentView): WhatIfEntry[] {
  return (view.overlay?.entries ?? []).filter((entry) => !entry.manual_review);
}

export function overlayReviewList(view: AssessmentView): WhatIfEntry[] {
  return (view.overlay?.entries ?? []).filter((entry) => entry.manual_review);
}

export function setBanner(view: AssessmentView, banner: string | null): AssessmentView {
  return { ...view, banner };
}

export function isComplete(view: AssessmentView): boolean {
  const factorCount = view.rubric.factors.length;
  return view.document.source_assessments.every((s) => {
    const assigned = new Set(s.assignments.map((a) => a.factor));
    return view.rubric.factors.every((f) => assigned.has(f.id)) && assigned.size >= factorCount;
  });
}

export function missingFactors(view: AssessmentView): string[] {
  const missing: string[] = [];
  for (const assessment of view.document.source_assessments) {
    const assigned = new Set(assessment.assignments.map((a) => a.factor));
    for (const factor of view.rubric.factors) {
      if (!assigned.has(factor.id)) {
        missing.push(cellId(assessment.source, factor.id));
      }
    }
  }
  return missing;
}
