import { beforeEach, describe, expect, test } from "vitest";

import type { ApiClient } from "../src/api";
import { Viewer } from "../src/main";
import {
  cellValue,
  filteredRows,
  initialState,
  latestRecord,
  rowLabel,
  visibleModes,
} from "../src/state";
import type { ViewerState } from "../src/state";
import { renderDetail, renderRerun, renderTable } from "../src/render";
import type { ExecutionRecord, Verdict } from "../src/types";
import { pageSkeleton } from "./server";

function record(test: string, config: string, kind = "Result", value: string | null = "aa"): ExecutionRecord {
  return {
    test_uid: test,
    config_uid: config,
    campaign_id: "c".repeat(16),
    started_at: "2026-08-16T00:00:00Z",
    wall_ms: 12,
    exit: { kind: "code", value: 0 },
    outcome: { kind, value: kind === "Result" ? value : null },
    command: `mk-eval ${test}.mk`,
    stdout: "RESULT: aa\n",
    stderr: "",
    stdout_truncated: false,
    stderr_truncated: false,
    stdout_payload: null,
    stderr_payload: null,
  };
}

function verdict(test: string, perConfig: Record<string, string>, noVote: string[] = []): Verdict {
  return {
    test_uid: test,
    majority: "aa",
    inconclusive: Object.keys(perConfig).length === 0,
    per_config: perConfig,
    no_vote_configs: noVote,
  };
}

function sceneState(): ViewerState {
  const state = initialState();
  state.executions = [
    record("t1", "good"),
    record("t1", "bad", "Result", "ff"),
    record("t2", "good"),
    record("t2", "bad"),
    record("t3", "good", "CompilerCrash", null),
    record("t3", "bad"),
  ];
  state.verdicts = {
    t1: verdict("t1", { good: "Correct", bad: "WrongCode" }),
    t2: verdict("t2", { good: "Correct", bad: "Correct" }),
    t3: verdict("t3", { good: "CompilerCrash", bad: "Correct" }),
  };
  state.tests = {
    t1: { kind: "test", uid: "t1", created_at: "", mode: "basic", generator_version: "1.0.0", source_ref: "kernel.mk", family: null, invalidation: null },
    t2: { kind: "test", uid: "t2", created_at: "", mode: "vector", generator_version: "1.0.0", source_ref: "kernel.mk", family: null, invalidation: null },
    t3: { kind: "test", uid: "t3", created_at: "", mode: "basic", generator_version: "1.0.0", source_ref: "kernel.mk", family: null, invalidation: null },
  };
  return state;
}

describe("row labels", () => {
  test("labels come from the verdict's per-config map", () => {
    const state = sceneState();
    expect(rowLabel(state.executions[0], state.verdicts)).toBe("Correct");
    expect(rowLabel(state.executions[1], state.verdicts)).toBe("WrongCode");
  });

  test("a config outside the vote falls back to Inconclusive", () => {
    const verdicts = { t1: verdict("t1", {}, ["good"]) };
    expect(rowLabel(record("t1", "good"), verdicts)).toBe("Inconclusive");
  });

  test("an unclassified campaign yields blank labels", () => {
    expect(rowLabel(record("t1", "good"), {})).toBe("");
  });
});

describe("cell values", () => {
  test("key paths resolve nested and plain fields", () => {
    const state = sceneState();
    const rec = state.executions[1];
    expect(cellValue(rec, state, "test_uid")).toBe("t1");
    expect(cellValue(rec, state, "outcome.kind")).toBe("Result");
    expect(cellValue(rec, state, "outcome.value")).toBe("ff");
    expect(cellValue(rec, state, "exit.value")).toBe("0");
    expect(cellValue(rec, state, "wall_ms")).toBe("12");
    expect(cellValue(rec, state, "verdict.label")).toBe("WrongCode");
    expect(cellValue(rec, state, "verdict.majority")).toBe("aa");
    expect(cellValue(rec, state, "verdict.inconclusive")).toBe("false");
  });

  test("label columns are membership indicators", () => {
    const state = sceneState();
    expect(cellValue(state.executions[1], state, "label.WrongCode")).toBe("1");
    expect(cellValue(state.executions[0], state, "label.WrongCode")).toBe("");
  });
});

describe("filtering", () => {
  test("filters compose and count what survives", () => {
    const state = sceneState();
    expect(filteredRows(state)).toHaveLength(6);

    state.filters.label = "WrongCode";
    expect(filteredRows(state)).toHaveLength(1);
    expect(filteredRows(state)[0].test_uid).toBe("t1");

    state.filters.label = "";
    state.filters.mode = "vector";
    expect(filteredRows(state)).toHaveLength(2);

    state.filters.config = "bad";
    expect(filteredRows(state)).toHaveLength(1);

    state.filters.config = "";
    state.filters.mode = "";
    state.filters.test = "3";
    expect(filteredRows(state)).toHaveLength(2);
  });

  test("modes list follows first appearance", () => {
    expect(visibleModes(sceneState())).toEqual(["basic", "vector"]);
  });

  test("the latest record wins for a pair", () => {
    const state = sceneState();
    state.executions.push(record("t1", "good", "Result", "ee"));
    expect(latestRecord(state, "t1", "good")?.outcome.value).toBe("ee");
    expect(latestRecord(state, "t9", "good")).toBeNull();
  });
});

describe("rendering", () => {
  beforeEach(() => {
    document.body.innerHTML = pageSkeleton();
  });

  test("rendered columns always equal the active view's columns", () => {
    const state = sceneState();
    state.view = { name: "narrow", columns: ["test_uid", "verdict.label"], filters: {} };
    renderTable(document, state);
    const headers = [...document.querySelectorAll("#results-head th")].map((th) => th.textContent);
    expect(headers).toEqual(state.view.columns);
    const firstRowCells = document.querySelectorAll("#results-body tr:first-child td");
    expect(firstRowCells).toHaveLength(2);
  });

  test("flagged rows are marked and the count is displayed", () => {
    const state = sceneState();
    renderTable(document, state);
    expect(document.querySelectorAll("#results-body tr")).toHaveLength(6);
    expect(document.querySelectorAll("#results-body tr.flagged")).toHaveLength(2);
    expect(document.getElementById("row-count")!.textContent).toBe("6 of 6 rows");
  });

  test("detail pane shows timeout badge and truncation marker", () => {
    const state = sceneState();
    const rec = record("t1", "good", "Timeout", null);
    rec.stdout_truncated = true;
    state.detail = { test: "t1", config: "good" };
    renderDetail(document, state, { test: null, record: rec, command: "mk-eval x" });
    expect(document.getElementById("detail-outcome")!.textContent).toBe("Timeout");
    expect(document.getElementById("detail-stdout-trunc")!.hidden).toBe(false);
    expect(document.getElementById("detail-stderr-trunc")!.hidden).toBe(true);
    expect(document.getElementById("detail-command")!.textContent).toBe("mk-eval x");
  });

  test("a missing record gets the not-found pane", () => {
    const state = sceneState();
    state.detail = { test: "t9", config: "good" };
    renderDetail(document, state, { test: null, record: null, command: null });
    expect(document.getElementById("detail-missing")!.hidden).toBe(false);
    expect(document.getElementById("detail-content")!.hidden).toBe(true);
  });
});

describe("rerun serialization", () => {
  beforeEach(() => {
    document.body.innerHTML = pageSkeleton();
  });

  test("a second rerun while one is in flight is rejected visibly", async () => {
    let release: () => void = () => {};
    const gate = new Promise<void>((resolve) => (release = resolve));
    const calls: string[] = [];
    const api = {
      rerun: async (test: string) => {
        calls.push(test);
        await gate;
        return record("t1", "good");
      },
      executions: async () => [],
      verdicts: async () => ({}),
    } as unknown as ApiClient;

    const viewer = new Viewer(document, api);
    viewer.state.detail = { test: "t1", config: "good" };

    const first = viewer.triggerRerun();
    expect(viewer.state.rerun.phase).toBe("running");
    await viewer.triggerRerun();
    expect(document.getElementById("rerun-status")!.textContent).toContain("already in flight");
    expect(calls).toHaveLength(1);

    release();
    await first;
    expect(viewer.state.rerun.phase).toBe("done");
  });

  test("a failed rerun reports and leaves the table alone", async () => {
    const api = {
      rerun: async () => {
        throw new Error("connection refused");
      },
    } as unknown as ApiClient;
    const viewer = new Viewer(document, api);
    viewer.state.detail = { test: "t1", config: "good" };
    viewer.state.executions = [record("t1", "good")];

    await viewer.triggerRerun();
    expect(viewer.state.rerun.phase).toBe("failed");
    expect(viewer.state.executions).toHaveLength(1);
    renderRerun(document, viewer.state);
    expect(document.getElementById("rerun-status")!.textContent).toContain("failed");
  });
});
