import { ApiClient, ApiFailure } from "./api";
import { FALLBACK_VIEW, initialState, latestRecord } from "./state";
import type { ViewerState } from "./state";
import { renderAll, renderBanner, renderRerun, renderTable } from "./render";
import type { DetailData } from "./render";
import type { TestMeta } from "./types";

function message(err: unknown): string {
  return err instanceof ApiFailure ? err.message : String(err);
}

export class Viewer {
  readonly state: ViewerState = initialState();
  private detailData: DetailData | null = null;
  private readonly sourceCache = new Map<string, TestMeta>();

  constructor(
    private readonly doc: Document,
    private readonly api: ApiClient,
  ) {}

  async start(): Promise<void> {
    try {
      const [campaigns, views, configs] = await Promise.all([
        this.api.campaigns(),
        this.api.views(),
        this.api.configs(),
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

  async selectCampaign(uid: string): Promise<void> {
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
        this.api.verdicts(campaign.uid),
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
  async refresh(): Promise<void> {
    const campaign = this.state.campaign;
    if (campaign === null) return;
    try {
      const [executions, verdicts] = await Promise.all([
        this.api.executions(campaign.uid),
        this.api.verdicts(campaign.uid),
      ]);
      this.state.executions = executions;
      this.state.verdicts = verdicts;
      this.state.error = null;
      this.state.stale = false;
      if (this.state.detail && this.detailData) {
        this.detailData.record = latestRecord(
          this.state, this.state.detail.test, this.state.detail.config);
      }
    } catch (err) {
      // keep showing what we have, but say that it is no longer trusted
      this.state.error = message(err);
      this.state.stale = true;
    }
    this.render();
  }

  selectView(name: string): void {
    const view = this.state.views.find((v) => v.name === name);
    if (view) this.state.view = view;
    this.render();
  }

  setFilter(key: keyof ViewerState["filters"], value: string): void {
    this.state.filters[key] = value;
    renderTable(this.doc, this.state);
  }

  async showDetail(test: string, config: string): Promise<void> {
    this.state.detail = { test, config };
    const record = latestRecord(this.state, test, config);
    const data: DetailData = { test: null, record, command: null };
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

  closeDetail(): void {
    this.state.detail = null;
    this.detailData = null;
    this.render();
  }

  /** At most one rerun in flight; a second click is rejected visibly. */
  async triggerRerun(): Promise<void> {
    const detail = this.state.detail;
    if (detail === null) return;
    if (this.state.rerun.phase === "running") {
      const running = this.state.rerun;
      this.state.rerun = {
        phase: "rejected",
        message: `rerun already in flight (${running.test} on ${running.config}); try again when it finishes`,
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
      // the table stays as it was; only the status line reports the failure
      this.state.rerun = { phase: "failed", message: message(err) };
    }
    renderRerun(this.doc, this.state);
  }

  async saveViewAs(name: string): Promise<void> {
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

  copyCommand(): void {
    const command = this.detailData?.command;
    if (!command) return;
    const clip = (this.doc.defaultView?.navigator as Navigator | undefined)?.clipboard;
    clip?.writeText(command).catch(() => {
      // clipboard access denied; the command stays selectable as text
    });
  }

  render(): void {
    renderAll(this.doc, this.state, this.detailData);
  }

  private async testWithSource(uid: string): Promise<TestMeta | null> {
    const cached = this.sourceCache.get(uid);
    if (cached) return cached;
    const metas = await this.api.tests({ uid, withSource: true });
    if (metas.length === 0) return null;
    this.sourceCache.set(uid, metas[0]);
    return metas[0];
  }
}

/** Wire the static page skeleton to a Viewer and start it. */
export function boot(doc: Document, api: ApiClient): Viewer {
  const viewer = new Viewer(doc, api);
  const fire = (work: Promise<void>) => {
    work.catch((err) => {
      viewer.state.error = message(err);
      renderBanner(doc, viewer.state);
    });
  };

  const on = (id: string, event: string, handler: (ev: Event) => void) => {
    const elem = doc.getElementById(id);
    if (!elem) throw new Error(`missing #${id} in page skeleton`);
    elem.addEventListener(event, handler);
  };

  on("campaign-select", "change", (ev) =>
    fire(viewer.selectCampaign((ev.target as HTMLSelectElement).value)));
  on("view-select", "change", (ev) =>
    viewer.selectView((ev.target as HTMLSelectElement).value));
  on("refresh-btn", "click", () => fire(viewer.refresh()));
  on("filter-label", "change", (ev) =>
    viewer.setFilter("label", (ev.target as HTMLSelectElement).value));
  on("filter-mode", "change", (ev) =>
    viewer.setFilter("mode", (ev.target as HTMLSelectElement).value));
  on("filter-config", "change", (ev) =>
    viewer.setFilter("config", (ev.target as HTMLSelectElement).value));
  on("filter-test", "input", (ev) =>
    viewer.setFilter("test", (ev.target as HTMLInputElement).value));
  on("results-body", "click", (ev) => {
    const row = (ev.target as HTMLElement).closest("tr");
    if (row?.dataset.test && row.dataset.config) {
      fire(viewer.showDetail(row.dataset.test, row.dataset.config));
    }
  });
  on("detail-close", "click", () => viewer.closeDetail());
  on("rerun-btn", "click", () => fire(viewer.triggerRerun()));
  on("copy-command-btn", "click", () => viewer.copyCommand());
  on("save-view-btn", "click", () => {
    const input = doc.getElementById("save-view-name") as HTMLInputElement;
    fire(viewer.saveViewAs(input.value));
    input.value = "";
  });
  doc.addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key === "Escape") viewer.closeDetail();
  });

  return viewer;
}
