import type {
  ApiError,
  CampaignMeta,
  ConfigMeta,
  ExecutionRecord,
  RerunCommand,
  RerunResponse,
  TestMeta,
  Verdict,
  ViewDef,
} from "./types";

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thrown for any non-2xx response; carries the server's ApiError body. */
export class ApiFailure extends Error {
  readonly error: ApiError;

  constructor(error: ApiError) {
    super(`${error.code}: ${error.message}`);
    this.name = "ApiFailure";
    this.error = error;
  }
}

function query(params: Record<string, string | number | boolean | undefined>): string {
  const q = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== "") q.set(key, String(value));
  }
  const s = q.toString();
  return s ? `?${s}` : "";
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiFailure({ status: 0, code: "unreachable", message: String(err) });
    }
    if (!resp.ok) {
      let error: ApiError;
      try {
        error = (await resp.json()) as ApiError;
      } catch {
        error = { status: resp.status, code: "http_error", message: resp.statusText };
      }
      throw new ApiFailure(error);
    }
    return (await resp.json()) as T;
  }

  campaigns(): Promise<CampaignMeta[]> {
    return this.request("GET", "/api/campaigns");
  }

  tests(params: { uid?: string; mode?: string; active?: boolean; withSource?: boolean } = {}): Promise<TestMeta[]> {
    return this.request("GET", "/api/tests" + query({
      uid: params.uid,
      mode: params.mode,
      active: params.active,
      with_source: params.withSource,
    }));
  }

  configs(): Promise<ConfigMeta[]> {
    return this.request("GET", "/api/configs");
  }

  executions(campaign: string, params: { test?: string; config?: string; outcome?: string; mode?: string } = {}): Promise<ExecutionRecord[]> {
    return this.request("GET", "/api/executions" + query({ campaign, ...params }));
  }

  verdicts(campaign: string): Promise<Record<string, Verdict>> {
    return this.request("GET", "/api/verdicts" + query({ campaign }));
  }

  views(): Promise<ViewDef[]> {
    return this.request("GET", "/api/views");
  }

  putView(name: string, columns: string[], filters: Record<string, string> = {}): Promise<ViewDef> {
    return this.request("PUT", `/api/views/${encodeURIComponent(name)}`, { columns, filters });
  }

  rerunCommand(test: string, config: string, threads: number): Promise<RerunCommand> {
    return this.request("GET", "/api/rerun-command" + query({ test, config, threads }));
  }

  rerun(test: string, config: string, threads: number, campaign?: string): Promise<RerunResponse> {
    return this.request("POST", "/api/rerun", { test, config, threads, campaign });
  }
}
