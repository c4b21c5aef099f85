// The three investigator flows, DOM-free: edit a cell, run a what-if
// overlay, rank/export. main.ts binds these to the page; tests drive them
// directly against a stubbed service.

import { ApiClient, ApiError, OfflineError } from "./api.js";
import { severityColor } from "./colors.js";
import {
  AssessmentView,
  applyEditFailure,
  applyEditSuccess,
  discardOverlay,
  editNeedsRequest,
  markDirty,
  overlayApplyPlan,
  setOverlay,
} from "./state.js";
import type { RankEntry } from "./types.js";

export interface EditOutcome {
  view: AssessmentView;
  // color the saved cell takes, straight from the service's returned severity
  recoloredTo: string | null;
  networkCalled: boolean;
  error: string | null;
}

function errorName(error: unknown): string {
  if (error instanceof ApiError) return error.errorName;
  if (error instanceof OfflineError) return "offline: service unreachable";
  throw error;
}

export async function editAssignmentFlow(
  view: AssessmentView,
  api: ApiClient,
  source: string,
  factor: string,
  category: string,
  rationale = "set in workspace",
): Promise<EditOutcome> {
  if (!editNeedsRequest(view, source, factor, category)) {
    return { view, recoloredTo: null, networkCalled: false, error: null };
  }
  const pending = markDirty(view, source, factor);
  try {
    const response = await api.putAssignment(view.document.id, { source, factor, category, rationale });
    return {
      view: applyEditSuccess(pending, response),
      recoloredTo: severityColor(response.severity),
      networkCalled: true,
      error: null,
    };
  } catch (error) {
    const name = errorName(error);
    return { view: applyEditFailure(pending, source, factor, name), recoloredTo: null, networkCalled: true, error: name };
  }
}

export async function whatIfPanelFlow(
  view: AssessmentView,
  api: ApiClient,
  override: { profile?: unknown; profile_name?: string },
): Promise<AssessmentView> {
  const diff = await api.whatIf(view.document.id, override);
  return setOverlay(view, diff);
}

// Applying an overlay sends one PUT per suggested-cell entry; manual cells
// stay untouched (they are in the review list instead).
export async function applyOverlayFlow(view: AssessmentView, api: ApiClient): Promise<AssessmentView> {
  let current = view;
  for (const entry of overlayApplyPlan(view)) {
    const response = await api.putAssignment(view.document.id, {
      source: entry.source,
      factor: entry.factor,
      category: entry.new_category,
      rationale: "applied from what-if overlay",
    });
    current = applyEditSuccess(current, response);
  }
  return discardOverlay(current);
}

export async function rankFlow(api: ApiClient, documentId: string): Promise<RankEntry[]> {
  const response = await api.getRank(documentId);
  return response.rank; // service order, untouched
}

export interface ExportResult {
  bytes: ArrayBuffer;
  contentType: string;
  filename: string;
}

export async function exportFlow(api: ApiClient, documentId: string, format: string): Promise<ExportResult> {
  const download = await api.getReport(documentId, format);
  const extension = format === "markdown" ? "md" : format;
  return { bytes: download.bytes, contentType: download.contentType, filename: `${documentId}.${extension}` };
}
