"use strict";
(() => {
  // src/api.ts
  var ApiFailure = class extends Error {
    constructor(error) {
      super(`${error.code}: ${error.message}`);
      this.name = "ApiFailure";
      this.error = error;
    }
  };
  function query(params) {
    const q = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== void 0 && value !== "") q.set(key, String(value));
    }
    const s = q.toString();
    return s ? `?${s}` : "";
  }
  var ApiClient = class {
    constructor(base, fetchFn = (url, init) => globalThis.fetch(url, init)) {
      this.base = base;
      this.fetchFn = fetchFn;
    }
    async request(method, path, body) {
      let resp;
      try {
        resp = await this.fetchFn(this.base + path, {
          method,
          headers: body === void 0 ? {} : { "content-type": "application/json" },
          body: body === void 0 ? void 0 : JSON.stringify(body)
        });
      } catch (err) {
        throw new ApiFailure({ status: 0, code: "unreachable", message: String(err) });
      }
      if (!resp.ok) {
        let error;
        try {
          error = await resp.json();
        } catch {
          error = { status: resp.status, code: "http_error", message: resp.statusText };
        }
        throw new ApiFailure(error);
      }
      return await resp.json();
    }
    campaigns() {
      return this.request("GET", "/api/campaigns");
    }
    tests(params = {}) {
      return this.request("GET", "/api/tests" + query({
        uid: params.uid,
        mode: params.mode,
        active: params.active,
        with_source: params.withSource
      }));
    }
    configs() {
      return this.request("GET", "/api/configs");
    }
    executions(campaign, params = {}) {
      return this.request("GET", "/api/executions" + query({ campaign, ...params }));
    }
    verdicts(campaign) {
      return this.request("GET", "/api/verdicts" + query({ campaign }));
    }
    views() {
      return this.request("GET", "/api/views");
    }
    putView(name, columns, filters = {}) {
      return this.request("PUT", `/api/views/${encodeURIComponent(name)}`, { columns, filters });
    }
    rerunCommand(test, config, threads) {
      return this.request("GET", "/api/rerun-command" + query({ test, config, threads }));
    }
    rerun(test, config, threads, campaign) {
      return this.request("POST", "/api/rerun", { test, config, threads, campaign });
    }
  };

  // src/state.ts
  var LABELS = [
    "Correct",
    "WrongCode",
    "CompilerCrash",
    "RuntimeCrash",
    "Timeout",
    "Inconclusive"
  ];
  var FLAGGED = /* @__PURE__ */ new Set(["WrongCode", "CompilerCrash", "RuntimeCrash"]);
  var FALLBACK_VIEW = {
    name: "default",
    columns: ["test_uid", "config_uid", "outcome.kind", "outcome.value", "verdict.label", "wall_ms"],
    filters: {}
  };
  function initialState() {
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
      stale: false
    };
  }
  function rowLabel(rec, verdicts) {
    const verdict = verdicts[rec.test_uid];
    if (!verdict) return "";
    return verdict.per_config[rec.config_uid] ?? "Inconclusive";
  }
  function cellValue(rec, state, column) {
    const verdict = state.verdicts[rec.test_uid];
    if (column === "verdict.label") return rowLabel(rec, state.verdicts);
    if (column === "verdict.majority") return verdict?.majority ?? "";
    if (column === "verdict.inconclusive") {
      return verdict === void 0 ? "" : String(verdict.inconclusive);
    }
    if (column.startsWith("label.")) {
      return rowLabel(rec, state.verdicts) === column.slice(6) ? "1" : "";
    }
    if (column === "exit.kind") return rec.exit.kind;
    if (column === "exit.value") return rec.exit.value === null ? "" : String(rec.exit.value);
    if (column === "outcome.kind") return rec.outcome.kind;
    if (column === "outcome.value") return rec.outcome.value === null ? "" : String(rec.outcome.value);
    const plain = rec[column];
    if (plain === null || plain === void 0) return "";
    return String(plain);
  }
  function filteredRows(state) {
    const { label, mode, config, test } = state.filters;
    return state.executions.filter((rec) => {
      if (label && rowLabel(rec, state.verdicts) !== label) return false;
      if (mode && state.tests[rec.test_uid]?.mode !== mode) return false;
      if (config && rec.config_uid !== config) return false;
      if (test && !rec.test_uid.includes(test)) return false;
      return true;
    });
  }
  function visibleModes(state) {
    const seen = [];
    for (const rec of state.executions) {
      const mode = state.tests[rec.test_uid]?.mode;
      if (mode && !seen.includes(mode)) seen.push(mode);
    }
    return seen;
  }
  function latestRecord(state, test, config) {
    for (let i = state.executions.length - 1; i >= 0; i--) {
      const rec = state.executions[i];
      if (rec.test_uid === test && rec.config_uid === config) return rec;
    }
    return null;
  }

  // src/render.ts
  function el(doc, id) {
    const found = doc.getElementById(id);
    if (!found) throw new Error(`missing #${id} in page skeleton`);
    return found;
  }
  function fillSelect(select, options, blankLabel) {
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
    if ([...select.options].some((o) => o.value === previous)) {
      select.value = previous;
    }
  }
  function renderChrome(doc, state) {
    const campaignSelect = el(doc, "campaign-select");
    fillSelect(
      campaignSelect,
      state.campaigns.map((c) => ({ value: c.uid, label: `${c.name} (${c.uid})` })),
      state.campaigns.length === 0 ? "no campaigns" : null
    );
    if (state.campaign) campaignSelect.value = state.campaign.uid;
    fillSelect(
      el(doc, "view-select"),
      state.views.map((v) => ({ value: v.name, label: v.name })),
      null
    );
    el(doc, "view-select").value = state.view.name;
    fillSelect(
      el(doc, "filter-label"),
      LABELS.map((l) => ({ value: l, label: l })),
      "all labels"
    );
    fillSelect(
      el(doc, "filter-mode"),
      visibleModes(state).map((m) => ({ value: m, label: m })),
      "all modes"
    );
    fillSelect(
      el(doc, "filter-config"),
      (state.campaign?.config_uids ?? []).map((uid) => ({
        value: uid,
        label: state.configs[uid]?.name ?? uid
      })),
      "all configs"
    );
  }
  function renderTable(doc, state) {
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
      if (state.detail && state.detail.test === rec.test_uid && state.detail.config === rec.config_uid) {
        tr.classList.add("selected");
      }
      for (const column of state.view.columns) {
        const td = doc.createElement("td");
        td.textContent = cellValue(rec, state, column);
        tr.appendChild(td);
      }
      body.appendChild(tr);
    });
    el(doc, "row-count").textContent = `${rows.length} of ${state.executions.length} rows`;
  }
  function renderBanner(doc, state) {
    const banner = el(doc, "error-banner");
    banner.hidden = state.error === null;
    banner.textContent = state.error ?? "";
    const stale = el(doc, "stale-flag");
    stale.hidden = !state.stale;
  }
  function renderRerun(doc, state) {
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
  function renderDetail(doc, state, data) {
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
      missing.textContent = `no execution record for test ${state.detail.test} on config ${state.detail.config}`;
      return;
    }
    missing.hidden = true;
    content.hidden = false;
    const rec = data.record;
    el(doc, "detail-title").textContent = `${rec.test_uid} on ${rec.config_uid}`;
    const outcome = el(doc, "detail-outcome");
    outcome.textContent = rec.outcome.value === null ? rec.outcome.kind : `${rec.outcome.kind} ${rec.outcome.value}`;
    outcome.className = `badge badge-${rec.outcome.kind.toLowerCase()}`;
    el(doc, "detail-wall").textContent = `${rec.wall_ms} ms`;
    el(doc, "detail-command").textContent = data.command ?? "";
    el(doc, "detail-source").textContent = data.test?.source ?? "";
    el(doc, "detail-stdout").textContent = rec.stdout;
    el(doc, "detail-stderr").textContent = rec.stderr;
    el(doc, "detail-stdout-trunc").hidden = !rec.stdout_truncated;
    el(doc, "detail-stderr-trunc").hidden = !rec.stderr_truncated;
  }
  function renderAll(doc, state, detail) {
    renderChrome(doc, state);
    renderTable(doc, state);
    renderBanner(doc, state);
    renderRerun(doc, state);
    renderDetail(doc, state, detail);
  }

  // src/main.ts
  function message(err) {
    return err instanceof ApiFailure ? err.message : String(err);
  }
  var Viewer = class {
    constructor(doc, api) {
      this.doc = doc;
      this.api = api;
      this.state = initialState();
      this.detailData = null;
      this.sourceCache = /* @__PURE__ */ new Map();
    }
    async start() {
      try {
        const [campaigns, views, configs] = await Promise.all([
          this.api.campaigns(),
          this.api.views(),
          this.api.configs()
        ]);
        this.state.campaigns = campaigns;
        this.state.views = views;
        this.state.view = views.find((v) => v.name === "default") ?? views[0] ?? FALLBACK_VIEW;
        this.state.configs = Object.fromEntries(configs.map((c) => [c.uid, c]));
        this.state.error = null;
        if (campaigns.length > 0) {
          await this.selectCampaign(campaigns[campaigns.length - 1].uid);
          return;
        }
      } catch (err) {
        this.state.error = message(err);
        this.state.stale = true;
      }
      this.render();
    }
    async selectCampaign(uid) {
      const campaign = this.state.campaigns.find((c) => c.uid === uid) ?? null;
      this.state.campaign = campaign;
      this.state.detail = null;
      this.detailData = null;
      if (campaign === null) {
        this.state.executions = [];
        this.state.verdicts = {};
        this.render();
        return;
      }
      try {
        const [tests, executions, verdicts] = await Promise.all([
          this.api.tests({}),
          this.api.executions(campaign.uid),
          this.api.verdicts(campaign.uid)
        ]);
        this.state.tests = Object.fromEntries(tests.map((t) => [t.uid, t]));
        this.state.executions = executions;
        this.state.verdicts = verdicts;
        this.state.error = null;
        this.state.stale = false;
      } catch (err) {
        this.state.error = message(err);
        this.state.stale = true;
      }
      this.render();
    }
    /** Re-pull executions and verdicts for the current campaign in place;
     * the page itself never reloads. */
    async refresh() {
      const campaign = this.state.campaign;
      if (campaign === null) return;
      try {
        const [executions, verdicts] = await Promise.all([
          this.api.executions(campaign.uid),
          this.api.verdicts(campaign.uid)
        ]);
        this.state.executions = executions;
        this.state.verdicts = verdicts;
        this.state.error = null;
        this.state.stale = false;
        if (this.state.detail && this.detailData) {
          this.detailData.record = latestRecord(
            this.state,
            this.state.detail.test,
            this.state.detail.config
          );
        }
      } catch (err) {
        this.state.error = message(err);
        this.state.stale = true;
      }
      this.render();
    }
    selectView(name) {
      const view = this.state.views.find((v) => v.name === name);
      if (view) this.state.view = view;
      this.render();
    }
    setFilter(key, value) {
      this.state.filters[key] = value;
      renderTable(this.doc, this.state);
    }
    async showDetail(test, config) {
      this.state.detail = { test, config };
      const record = latestRecord(this.state, test, config);
      const data = { test: null, record, command: null };
      this.detailData = data;
      try {
        data.test = await this.testWithSource(test);
        const threads = this.state.campaign?.threads ?? 1;
        data.command = (await this.api.rerunCommand(test, config, threads)).command;
      } catch (err) {
        this.state.error = message(err);
      }
      this.render();
    }
    closeDetail() {
      this.state.detail = null;
      this.detailData = null;
      this.render();
    }
    /** At most one rerun in flight; a second click is rejected visibly. */
    async triggerRerun() {
      const detail = this.state.detail;
      if (detail === null) return;
      if (this.state.rerun.phase === "running") {
        const running = this.state.rerun;
        this.state.rerun = {
          phase: "rejected",
          message: `rerun already in flight (${running.test} on ${running.config}); try again when it finishes`
        };
        renderRerun(this.doc, this.state);
        this.state.rerun = running;
        return;
      }
      this.state.rerun = { phase: "running", test: detail.test, config: detail.config };
      renderRerun(this.doc, this.state);
      try {
        const threads = this.state.campaign?.threads ?? 1;
        await this.api.rerun(detail.test, detail.config, threads, this.state.campaign?.uid);
        await this.refresh();
        this.state.rerun = { phase: "done", test: detail.test, config: detail.config };
      } catch (err) {
        this.state.rerun = { phase: "failed", message: message(err) };
      }
      renderRerun(this.doc, this.state);
    }
    async saveViewAs(name) {
      if (!name.trim()) return;
      try {
        await this.api.putView(name.trim(), this.state.view.columns, this.state.view.filters);
        this.state.views = await this.api.views();
        this.selectView(name.trim());
      } catch (err) {
        this.state.error = message(err);
        renderBanner(this.doc, this.state);
      }
    }
    copyCommand() {
      const command = this.detailData?.command;
      if (!command) return;
      const clip = this.doc.defaultView?.navigator?.clipboard;
      clip?.writeText(command).catch(() => {
      });
    }
    render() {
      renderAll(this.doc, this.state, this.detailData);
    }
    async testWithSource(uid) {
      const cached = this.sourceCache.get(uid);
      if (cached) return cached;
      const metas = await this.api.tests({ uid, withSource: true });
      if (metas.length === 0) return null;
      this.sourceCache.set(uid, metas[0]);
      return metas[0];
    }
  };
  function boot(doc, api) {
    const viewer2 = new Viewer(doc, api);
    const fire = (work) => {
      work.catch((err) => {
        viewer2.state.error = message(err);
        renderBanner(doc, viewer2.state);
      });
    };
    const on = (id, event, handler) => {
      const elem = doc.getElementById(id);
      if (!elem) throw new Error(`missing #${id} in page skeleton`);
      elem.addEventListener(event, handler);
    };
    on("campaign-select", "change", (ev) => fire(viewer2.selectCampaign(ev.target.value)));
    on("view-select", "change", (ev) => viewer2.selectView(ev.target.value));
    on("refresh-btn", "click", () => fire(viewer2.refresh()));
    on("filter-label", "change", (ev) => viewer2.setFilter("label", ev.target.value));
    on("filter-mode", "change", (ev) => viewer2.setFilter("mode", ev.target.value));
    on("filter-config", "change", (ev) => viewer2.setFilter("config", ev.target.value));
    on("filter-test", "input", (ev) => viewer2.setFilter("test", ev.target.value));
    on("results-body", "click", (ev) => {
      const row = ev.target.closest("tr");
      if (row?.dataset.test && row.dataset.config) {
        fire(viewer2.showDetail(row.dataset.test, row.dataset.config));
      }
    });
    on("detail-close", "click", () => viewer2.closeDetail());
    on("rerun-btn", "click", () => fire(viewer2.triggerRerun()));
    on("copy-command-btn", "click", () => viewer2.copyCommand());
    on("save-view-btn", "click", () => {
      const input = doc.getElementById("save-view-name");
      fire(viewer2.saveViewAs(input.value));
      input.value = "";
    });
    doc.addEventListener("keydown", (ev) => {
      if (ev.key === "Escape") viewer2.closeDetail();
    });
    return viewer2;
  }

  // src/boot.ts
  var viewer = boot(document, new ApiClient(""));
  void viewer.start();
})();
