// Viewer state and the pure row pipeline: join execution records with
// verdict labels, apply the client-side filters, project view columns.

import type {
  CampaignMeta,
  ConfigMeta,
  ExecutionRecord,
  TestMeta,
  Verdict,
  ViewDef,
} from "./types";

export const LABELS = [
  "Correct",
  "WrongCode",
  "CompilerCrash",
  "RuntimeCrash",
  "Timeout",
  "Inconclusive",
] as const;

// labels that mark a row as a finding rather than agreement
export const FLAGGED = new Set(["WrongCode", "CompilerCrash", "RuntimeCrash"]);

export interface Filters {
  label: string;
  mode: string;
  config: string;
  test: string;
}

export type RerunStatus =
  | { phase: "idle" }
  | { phase: "running"; test: string; config: string }
  | { phase: "done"; test: string; config: string }
  | { phase: "failed"; message: string }
  | { phase: "rejected"; message: string };

export interface ViewerState {
  campaigns: CampaignMeta[];
  campaign: CampaignMeta | null;
  views: ViewDef[];
  view: ViewDef;
  filters: Filters;
  detail: { test: string; config: string } | null;
  rerun: RerunStatus;
  executions: ExecutionRecord[];
  verdicts: Record<string, Verdict>;
  tests: Record<string, TestMeta>;
  configs: Record<string, ConfigMeta>;
  error: string | null;
  stale: boolean;
}

export const FALLBACK_VIEW: ViewDef = {
  name: "default",
  columns: ["test_uid", "config_uid", "outcome.kind", "outcome.value", "verdict.label", "wall_ms"],
  filters: {},
};

export function initialState(): ViewerState {
  return {
    campaigns: [],
    campaign: null,
    views: [],
    view: FALLBACK_VIEW,
    filters: { label: "", mode: "", config: "", test: "" },
    detail: null,
    rerun: { phase: "idle" },
    executions: [],
    verdicts: {},
    tests: {},
    configs: {},
    error: null,
    stale: false,
  };
}

/** Verdict label for one record; "" when the campaign is unclassified. */
export function rowLabel(rec: ExecutionRecord, verdicts: Record<string, Verdict>): string {
  const verdict = verdicts[rec.test_uid];
  if (!verdict) return "";
  return verdict.per_config[rec.config_uid] ?? "Inconclusive";
}

/** Value of one view column for one record. Column names are the store's
 * key-paths; label.X columns render a 1/blank membership indicator. */
export function cellValue(rec: ExecutionRecord, state: ViewerState, column: string): string {
  const verdict = state.verdicts[rec.test_uid];
  if (column === "verdict.label") return rowLabel(rec, state.verdicts);
  if (column === "verdict.majority") return verdict?.majority ?? "";
  if (column === "verdict.inconclusive") {
    return verdict === undefined ? "" : String(verdict.inconclusive);
  }
  if (column.startsWith("label.")) {
    return rowLabel(rec, state.verdicts) === column.slice(6) ? "1" : "";
  }
  if (column === "exit.kind") return rec.exit.kind;
  if (column === "exit.value") return rec.exit.value === null ? "" : String(rec.exit.value);
  if (column === "outcome.kind") return rec.outcome.kind;
  if (column === "outcome.value") return rec.outcome.value === null ? "" : String(rec.outcome.value);
  const plain = (rec as unknown as Record<string, unknown>)[column];
  if (plain === null || plain === undefined) return "";
  return String(plain);
}

export function filteredRows(state: ViewerState): ExecutionRecord[] {
  const { label, mode, config, test } = state.filters;
  return state.executions.filter((rec) => {
    if (label && rowLabel(rec, state.verdicts) !== label) return false;
    if (mode && state.tests[rec.test_uid]?.mode !== mode) return false;
    if (config && rec.config_uid !== config) return false;
    if (test && !rec.test_uid.includes(test)) return false;
    return true;
  });
}

/** Modes present in the loaded corpus, in first-seen order. */
export function visibleModes(state: ViewerState): string[] {
  const seen: string[] = [];
  for (const rec of state.executions) {
    const mode = state.tests[rec.test_uid]?.mode;
    if (mode && !seen.includes(mode)) seen.push(mode);
  }
  return seen;
}

/** Latest execution record for a (test, config) pair, or null. */
export function latestRecord(state: ViewerState, test: string, config: string): ExecutionRecord | null {
  for (let i = state.executions.length - 1; i >= 0; i--) {
    const rec = state.executions[i];
    if (rec.test_uid === test && rec.config_uid === config) return rec;
  }
  return null;
}
