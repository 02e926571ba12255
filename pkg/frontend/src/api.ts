// Typed client for the control API. All endpoints live under /api and
// speak JSON; watch streams are newline-delimited JSON handled in watch.ts.

export type EntryKind = "root" | "compound" | "field" | "method";

export interface BrowseEntry {
  name: string;
  path: string;
  kind: EntryKind;
  preview: string;
  arity: number | null;
}

export interface InvokeResult {
  result: string;
  tstep?: number | null;
}

export interface EvalResult {
  result: string;
  output: string;
  tstep?: number | null;
}

export interface SeriesBatch {
  points: [number, number][];
  next: number;
}

export class ApiError extends Error {
  constructor(public status: number, public kind: string, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let kind = "HttpError";
  let message = `${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") kind = body.error;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiError(response.status, kind, message);
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(route: string): Promise<T> {
    const response = await this.fetchFn(this.base + route);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async postJson<T>(route: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + route, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  objects(): Promise<BrowseEntry[]> {
    return this.getJson("/api/objects");
  }

  members(path: string): Promise<BrowseEntry[]> {
    return this.getJson(`/api/object/${encodeURIComponent(path)}`);
  }

  async value(path: string): Promise<string> {
    const body = await this.getJson<{ value: string }>(
      `/api/value/${encodeURIComponent(path)}`,
    );
    return body.value;
  }

  invoke(path: string, args: string[]): Promise<InvokeResult> {
    return this.postJson("/api/invoke", { path, args });
  }

  evalScript(script: string): Promise<EvalResult> {
    return this.postJson("/api/eval", { script });
  }

  series(name: string, since: number): Promise<SeriesBatch> {
    return this.getJson(`/api/series/${encodeURIComponent(name)}?since=${since}`);
  }

  watchUrl(path: string, intervalMs: number): string {
    return `${this.base}/api/watch/${encodeURIComponent(path)}?interval_ms=${intervalMs}`;
  }
}
