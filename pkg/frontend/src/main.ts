// Assessment workspace: one active document per tab, grid layout mirroring
// the report tables (one sub-table per source, seven factor rows each).

import { ApiClient, ApiError, OfflineError } from "./api.js";
import { severityColor } from "./colors.js";
import { applyOverlayFlow, editAssignmentFlow, exportFlow, rankFlow, whatIfPanelFlow } from "./flows.js";
import {
  AssessmentView,
  categorySeverity,
  cellId,
  currentCategory,
  discardOverlay,
  factorOptions,
  isComplete,
  missingFactors,
  newView,
  overlayBadges,
  overlayReviewList,
} from "./state.js";
import type { EnvironmentProfile, NamedProfile, Rubric } from "./types.js";

const api = new ApiClient();

let view: AssessmentView | null = null;
let profiles: NamedProfile[] = [];
let rubric: Rubric | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showBanner(text: string | null) {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

function setView(next: AssessmentView | null) {
  view = next;
  renderGrid();
  renderOverlayPanel();
  renderRankControls();
  showBanner(view?.banner ?? null);
}

async function boot() {
  try {
    rubric = await api.getRubric();
    el<HTMLSpanElement>("rubric-version").textContent = `rubric ${rubric.version}`;
    const kb = await api.getKbSources();
    const profileResponse = await api.getProfiles();
    profiles = profileResponse.profiles;

    const profileSelect = el<HTMLSelectElement>("profile-select");
    profileSelect.innerHTML = "";
    for (const named of profiles) {
      const option = document.createElement("option");
      option.value = named.name;
      option.textContent = named.name;
      profileSelect.appendChild(option);
    }

    const sourceList = el<HTMLDivElement>("source-list");
    sourceList.innerHTML = "";
    for (const source of kb.sources) {
      const label = document.createElement("label");
      const checkbox = document.createElement("input");
      checkbox.type = "checkbox";
      checkbox.value = source.id;
      checkbox.checked = true;
      label.appendChild(checkbox);
      label.append(` ${source.id} (${source.facet})`);
      sourceList.appendChild(label);
    }

    const whatifSelect = el<HTMLSelectElement>("whatif-profile");
    whatifSelect.innerHTML = "<option value=''>(document profile)</option>";
    for (const named of profiles) {
      const option = document.createElement("option");
      option.value = named.name;
      option.textContent = named.name;
      whatifSelect.appendChild(option);
    }
  } catch (error) {
    showBanner(error instanceof OfflineError ? "offline: service unreachable" : String(error));
  }
}

async function createDocument() {
  if (!rubric) return;
  const title = el<HTMLInputElement>("title-input").value || "Assessment";
  const profileName = el<HTMLSelectElement>("profile-select").value;
  const sources = Array.from(
    el<HTMLDivElement>("source-list").querySelectorAll<HTMLInputElement>("input:checked"),
  ).map((input) => input.value);
  try {
    const created = await api.createAssessment({ title, sources, profile_name: profileName });
    setView(newView(created.document, rubric));
  } catch (error) {
    handleRequestError(error);
  }
}

function handleRequestError(error: unknown) {
  if (error instanceof OfflineError) {
    showBanner("offline: service unreachable");
  } else if (error instanceof ApiError) {
    showBanner(error.errorName);
  } else {
    showBanner(String(error));
  }
}

function renderGrid() {
  const grid = el<HTMLDivElement>("grid");
  grid.innerHTML = "";
  if (!view) return;
  const badges = overlayBadges(view);

  let rowNumber = 0;
  for (const assessment of view.document.source_assessments) {
    const table = document.createElement("table");
    const caption = document.createElement("caption");
    caption.textContent = assessment.source;
    table.appendChild(caption);
    const head = table.insertRow();
    for (const text of ["n", "Factors", "Category", "Score", "What-if"]) {
      const cell = document.createElement("th");
      cell.textContent = text;
      head.appendChild(cell);
    }

    for (const factor of view.rubric.factors) {
      rowNumber += 1;
      const row = table.insertRow();
      row.insertCell().textContent = String(rowNumber);
      row.insertCell().textContent = factor.display_name;

      const select = document.createElement("select");
      const assigned = currentCategory(view, assessment.source, factor.id);
      for (const option of factorOptions(view, factor.id)) {
        const optionEl = document.createElement("option");
        optionEl.value = option.id;
        optionEl.textContent = option.display_text;
        if (option.id === assigned) optionEl.selected = true;
        select.appendChild(optionEl);
      }
      select.addEventListener("change", () =>
        onCategoryChosen(assessment.source, factor.id, select),
      );
      row.insertCell().appendChild(select);

      const scoreCell = row.insertCell();
      scoreCell.id = `score-${cellId(assessment.source, factor.id)}`;
      if (assigned !== null) {
        const severity = categorySeverity(view, factor.id, assigned);
        paintScoreCell(scoreCell, severity);
      }

      const badgeCell = row.insertCell();
      const badge = badges.get(cellId(assessment.source, factor.id));
      if (badge) {
        const chip = document.createElement("span");
        chip.className = "badge";
        chip.textContent = `${badge.oldSeverity} -> ${badge.newSeverity}`;
        chip.style.backgroundColor = severityColor(badge.newSeverity);
        chip.title = `${badge.oldCategory} -> ${badge.newCategory}`;
        badgeCell.appendChild(chip);
      }
    }
    grid.appendChild(table);
  }
}

function paintScoreCell(cell: HTMLTableCellElement, severity: number) {
  cell.textContent = String(severity);
  cell.style.backgroundColor = severityColor(severity);
}

async function onCategoryChosen(source: string, factor: string, select: HTMLSelectElement) {
  if (!view) return;
  const outcome = await editAssignmentFlow(view, api, source, factor, select.value);
  setView(outcome.view);
  if (outcome.error) {
    showBanner(outcome.error); // the grid re-render also reverts the select
  } else if (outcome.recoloredTo) {
    const cell = document.getElementById(`score-${cellId(source, factor)}`);
    if (cell) (cell as HTMLTableCellElement).style.backgroundColor = outcome.recoloredTo;
  }
}

function buildOverrideProfile(): { profile?: EnvironmentProfile; profile_name?: string } {
  const presetName = el<HTMLSelectElement>("whatif-profile").value;
  const adminToggle = el<HTMLInputElement>("whatif-admin").checked;
  let base: EnvironmentProfile;
  if (presetName) {
    const named = profiles.find((p) => p.name === presetName);
    if (!named) throw new Error(`unknown preset ${presetName}`);
    base = JSON.parse(JSON.stringify(named.profile));
  } else {
    if (!view) throw new Error("no document loaded");
    base = JSON.parse(JSON.stringify(view.document.profile));
  }
  base.user_privilege = adminToggle ? "admin-with-uac" : "standard-user";
  return { profile: base };
}

async function runWhatIf() {
  if (!view) return;
  try {
    const next = await whatIfPanelFlow(view, api, buildOverrideProfile());
    setView(next);
    if (next.overlay && next.overlay.entries.length === 0) {
      showBanner("what-if: no changes");
    }
  } catch (error) {
    handleRequestError(error);
  }
}

async function applyOverlay() {
  if (!view || !view.overlay) return;
  try {
    setView(await applyOverlayFlow(view, api));
  } catch (error) {
    handleRequestError(error);
  }
}

function renderOverlayPanel() {
  const panel = el<HTMLDivElement>("overlay-controls");
  const review = el<HTMLUListElement>("review-list");
  review.innerHTML = "";
  if (!view || !view.overlay) {
    panel.style.display = "none";
    return;
  }
  panel.style.display = "block";
  for (const entry of overlayReviewList(view)) {
    const item = document.createElement("li");
    item.textContent = `${entry.source}/${entry.factor}: ${entry.old_category} -> ${entry.new_category} (${entry.note})`;
    review.appendChild(item);
  }
}

function renderRankControls() {
  const button = el<HTMLButtonElement>("rank-button");
  if (!view) {
    button.disabled = true;
    button.title = "create a document first";
    return;
  }
  if (!isComplete(view)) {
    button.disabled = true;
    button.title = `incomplete: ${missingFactors(view).join(", ")}`;
  } else {
    button.disabled = false;
    button.title = "";
  }
}

async function refreshRank() {
  if (!view) return;
  try {
    const entries = await rankFlow(api, view.document.id);
    const table = el<HTMLTableElement>("rank-table");
    table.innerHTML = "<tr><th>rank</th><th>source</th><th>severity profile</th></tr>";
    for (const entry of entries) {
      const row = table.insertRow();
      row.insertCell().textContent = String(entry.rank);
      row.insertCell().textContent = entry.source;
      row.insertCell().textContent = `[${entry.profile.join(", ")}]`;
    }
  } catch (error) {
    handleRequestError(error);
  }
}

async function exportReport(format: string) {
  if (!view) return;
  try {
    const result = await exportFlow(api, view.document.id, format);
    const blob = new Blob([result.bytes], { type: result.contentType });
    const anchor = document.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = result.filename;
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  } catch (error) {
    handleRequestError(error);
  }
}

function wireUp() {
  el<HTMLButtonElement>("create-button").addEventListener("click", createDocument);
  el<HTMLButtonElement>("whatif-run").addEventListener("click", runWhatIf);
  el<HTMLButtonElement>("overlay-apply").addEventListener("click", applyOverlay);
  el<HTMLButtonElement>("overlay-discard").addEventListener("click", () => {
    if (view) setView(discardOverlay(view));
  });
  el<HTMLButtonElement>("rank-button").addEventListener("click", refreshRank);
  el<HTMLButtonElement>("export-md").addEventListener("click", () => exportReport("md"));
  el<HTMLButtonElement>("export-html").addEventListener("click", () => exportReport("html"));
  el<HTMLButtonElement>("export-json").addEventListener("click", () => exportReport("json"));
  void boot();
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wireUp);
}
