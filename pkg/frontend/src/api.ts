import type {
  NetworkPayload,
  OptimizePayload,
  OptimizeRequest,
  RiskPayload,
  RiskRequest,
  SensitivityPayload,
  StatsPayload,
} from "./types.js";

/** Service answered with a non-2xx status (validation problem, no samples...). */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`API ${status}: ${detail}`);
  }
}

/** Could not reach the service at all. */
export class OfflineError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  network(): Promise<NetworkPayload> {
    return this.request("GET", "/api/network");
  }

  stats(y0: number): Promise<StatsPayload> {
    return this.request("GET", `/api/stats?y0=${encodeURIComponent(y0)}`);
  }

  risk(req: RiskRequest): Promise<RiskPayload> {
    return this.request("POST", "/api/risk", req);
  }

  sensitivity(y0: number): Promise<SensitivityPayload> {
    return this.request("POST", "/api/sensitivity", { y0 });
  }

  optimize(req: OptimizeRequest): Promise<OptimizePayload> {
    return this.request("POST", "/api/optimize", req);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new OfflineError(err);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const doc = (await response.json()) as { detail?: unknown };
        if (doc && doc.detail !== undefined) detail = JSON.stringify(doc.detail);
        if (typeof doc.detail === "string") detail = doc.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }
}
