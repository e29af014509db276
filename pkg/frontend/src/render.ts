// DOM rendering. Every function takes the document so the whole module
// stays usable under a synthetic DOM in tests. Data goes in through
// textContent only; record fields are never interpreted as markup.

import { FLAGGED, LABELS, cellValue, filteredRows, visibleModes } from "./state";
import type { ViewerState } from "./state";
import type { ExecutionRecord, TestMeta } from "./types";

export interface DetailData {
  test: TestMeta | null;
  record: ExecutionRecord | null;
  command: string | null;
}

function el<T extends HTMLElement>(doc: Document, id: string): T {
  const found = doc.getElementById(id);
  if (!found) throw new Error(`missing #${id} in page skeleton`);
  return found as T;
}

function fillSelect(
  select: HTMLSelectElement,
  options: { value: string; label: string }[],
  blankLabel: string | null,
): void {
  const previous = select.value;
  select.textContent = "";
  const doc = select.ownerDocument;
  if (blankLabel !== null) {
    const opt = doc.createElement("option");
    opt.value = "";
    opt.textContent = blankLabel;
    select.appendChild(opt);
  }
  for (const { value, label } of options) {
    const opt = doc.createElement("option");
    opt.value = value;
    opt.textContent = label;
    select.appendChild(opt);
  }
  // keep the user's pick when it still exists: filter state survives reloads
  if ([...select.options].some((o) => o.value === previous)) {
    select.value = previous;
  }
}

export function renderChrome(doc: Document, state: ViewerState): void {
  const campaignSelect = el<HTMLSelectElement>(doc, "campaign-select");
  fillSelect(
    campaignSelect,
    state.campaigns.map((c) => ({ value: c.uid, label: `${c.name} (${c.uid})` })),
    state.campaigns.length === 0 ? "no campaigns" : null,
  );
  if (state.campaign) campaignSelect.value = state.campaign.uid;

  fillSelect(
    el(doc, "view-select"),
    state.views.map((v) => ({ value: v.name, label: v.name })),
    null,
  );
  el<HTMLSelectElement>(doc, "view-select").value = state.view.name;

  fillSelect(
    el(doc, "filter-label"),
    LABELS.map((l) => ({ value: l, label: l })),
    "all labels",
  );
  fillSelect(
    el(doc, "filter-mode"),
    visibleModes(state).map((m) => ({ value: m, label: m })),
    "all modes",
  );
  fillSelect(
    el(doc, "filter-config"),
    (state.campaign?.config_uids ?? []).map((uid) => ({
      value: uid,
      label: state.configs[uid]?.name ?? uid,
    })),
    "all configs",
  );
}

export function renderTable(doc: Document, state: ViewerState): void {
  const head = el(doc, "results-head");
  head.textContent = "";
  const headRow = doc.createElement("tr");
  for (const column of state.view.columns) {
    const th = doc.createElement("th");
    th.textContent = column;
    headRow.appendChild(th);
  }
  head.appendChild(headRow);

  const rows = filteredRows(state);
  const body = el(doc, "results-body");
  body.textContent = "";
  rows.forEach((rec, index) => {
    const tr = doc.createElement("tr");
    tr.dataset.test = rec.test_uid;
    tr.dataset.config = rec.config_uid;
    tr.dataset.index = String(index);
    const label = cellValue(rec, state, "verdict.label");
    if (FLAGGED.has(label)) tr.classList.add("flagged");
    if (
      state.detail &&
      state.detail.test === rec.test_uid &&
      state.detail.config === rec.config_uid
    ) {
      tr.classList.add("selected");
    }
    for (const column of state.view.columns) {
      const td = doc.createElement("td");
      td.textContent = cellValue(rec, state, column);
      tr.appendChild(td);
    }
    body.appendChild(tr);
  });

  el(doc, "row-count").textContent =
    `${rows.length} of ${state.executions.length} rows`;
}

export function renderBanner(doc: Document, state: ViewerState): void {
  const banner = el(doc, "error-banner");
  banner.hidden = state.error === null;
  banner.textContent = state.error ?? "";
  const stale = el(doc, "stale-flag");
  stale.hidden = !state.stale;
}

export function renderRerun(doc: Document, state: ViewerState): void {
  const status = el(doc, "rerun-status");
  const rerun = state.rerun;
  status.className = `rerun-${rerun.phase}`;
  switch (rerun.phase) {
    case "idle":
      status.textContent = "";
      break;
    case "running":
      status.textContent = `rerun running: ${rerun.test} on ${rerun.config}`;
      break;
    case "done":
      status.textContent = `rerun done: ${rerun.test} on ${rerun.config}`;
      break;
    case "failed":
      status.textContent = `rerun failed: ${rerun.message}`;
      break;
    case "rejected":
      status.textContent = rerun.message;
      break;
  }
}

export function renderDetail(doc: Document, state: ViewerState, data: DetailData | null): void {
  const empty = el(doc, "detail-empty");
  const missing = el(doc, "detail-missing");
  const content = el(doc, "detail-content");
  empty.hidden = state.detail !== null;
  if (state.detail === null || data === null) {
    missing.hidden = true;
    content.hidden = true;
    return;
  }
  if (data.record === null) {
    missing.hidden = false;
    content.hidden = true;
    missing.textContent =
      `no execution record for test ${state.detail.test} on config ${state.detail.config}`;
    return;
  }
  missing.hidden = true;
  content.hidden = false;

  const rec = data.record;
  el(doc, "detail-title").textContent = `${rec.test_uid} on ${rec.config_uid}`;
  const outcome = el(doc, "detail-outcome");
  outcome.textContent =
    rec.outcome.value === null ? rec.outcome.kind : `${rec.outcome.kind} ${rec.outcome.value}`;
  outcome.className = `badge badge-${rec.outcome.kind.toLowerCase()}`;
  el(doc, "detail-wall").textContent = `${rec.wall_ms} ms`;
  el(doc, "detail-command").textContent = data.command ?? "";
  el(doc, "detail-source").textContent = data.test?.source ?? "";
  el(doc, "detail-stdout").textContent = rec.stdout;
  el(doc, "detail-stderr").textContent = rec.stderr;
  el(doc, "detail-stdout-trunc").hidden = !rec.stdout_truncated;
  el(doc, "detail-stderr-trunc").hidden = !rec.stderr_truncated;
}

export function renderAll(doc: Document, state: ViewerState, detail: DetailData | null): void {
  renderChrome(doc, state);
  renderTable(doc, state);
  renderBanner(doc, state);
  renderRerun(doc, state);
  renderDetail(doc, state, detail);
}
