import type {
  ErrorBody,
  GraphStats,
  Health,
  Neighborhood,
  SessionRef,
  SessionView,
  ToolEnvelope,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response carrying the service's error body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly correlationId: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The service could not be reached at all (network failure, not an HTTP error). */
export class ServiceUnreachableError extends Error {
  constructor(cause: unknown) {
    super("exploration service unreachable");
    this.name = "ServiceUnreachableError";
    this.cause = cause;
  }
}

/**
 * Thin typed client over the exploration service's HTTP API.
 *
 * Every method either resolves with the parsed JSON body, rejects with
 * `ApiError` (the service answered with an error envelope), or rejects with
 * `ServiceUnreachableError` (no answer at all). The correlation id of the
 * most recent response — success or failure — is kept on `lastCorrelationId`
 * so error surfaces can show it.
 */
export class ApiClient {
  lastCorrelationId: string | null = null;

  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {}

  async health(): Promise<Health> {
    return this.request("GET", "/healthz");
  }

  async stats(): Promise<GraphStats> {
    return this.request("GET", "/graph/stats");
  }

  async neighborhood(nodeId: string, depth = 1, etypes?: string[]): Promise<Neighborhood> {
    const params = new URLSearchParams({ depth: String(depth) });
    if (etypes !== undefined && etypes.length > 0) {
      params.set("etypes", etypes.join(","));
    }
    return this.request(
      "GET",
      `/graph/nodes/${encodeURIComponent(nodeId)}/neighborhood?${params}`,
    );
  }

  async callTool(name: string, args: Record<string, unknown>): Promise<ToolEnvelope> {
    return this.request("POST", `/tools/${encodeURIComponent(name)}`, { args });
  }

  async createSession(policy?: string): Promise<SessionRef> {
    return this.request("POST", "/sessions", policy === undefined ? {} : { policy });
  }

  async ask(sessionId: string, query: string, wait = false): Promise<SessionView> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/ask`, {
      query,
      wait,
    });
  }

  async session(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ServiceUnreachableError(cause);
    }
    const correlationId = response.headers.get("x-correlation-id");
    if (correlationId !== null) {
      this.lastCorrelationId = correlationId;
    }
    if (!response.ok) {
      const error = (await response.json().catch(() => null)) as ErrorBody | null;
      throw new ApiError(
        response.status,
        error?.code ?? "HTTP_ERROR",
        error?.message ?? `request failed with status ${response.status}`,
        error?.correlation_id ?? correlationId ?? "",
      );
    }
    return (await response.json()) as T;
  }
}
