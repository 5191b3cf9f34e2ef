/** Thin typed client over the session endpoints. The dashboard never
 * computes model numbers itself; everything rendered comes back from
 * these calls. */

import type {
  MetricsFrame,
  MutationAck,
  MutationCommand,
  SessionInfo,
  StateSnapshot,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string | null,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 204) {
      return undefined as T;
    }
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const code = payload?.code ?? "error";
      const message = payload?.message ?? `${method} ${path} failed (${response.status})`;
      throw new ApiRequestError(response.status, code, message, payload?.field);
    }
    return payload as T;
  }

  createSession(
    seed: number,
    overrides: Record<string, unknown> = {},
    clientToken?: string,
  ): Promise<SessionInfo> {
    return this.request("POST", "/sessions", {
      bundle: "default",
      config: { seed, ...overrides },
      client_token: clientToken,
    });
  }

  step(sessionId: string, n: number): Promise<{ frames: MetricsFrame[]; tick: number }> {
    return this.request("POST", `/sessions/${sessionId}/step`, { n });
  }

  mutate(sessionId: string, command: MutationCommand): Promise<MutationAck> {
    return this.request("POST", `/sessions/${sessionId}/mutations`, command);
  }

  metrics(
    sessionId: string,
    fromTick: number,
    toTick?: number,
  ): Promise<{ frames: MetricsFrame[]; tick: number }> {
    const range = toTick === undefined ? `from=${fromTick}` : `from=${fromTick}&to=${toTick}`;
    return this.request("GET", `/sessions/${sessionId}/metrics?${range}`);
  }

  snapshot(sessionId: string): Promise<StateSnapshot> {
    return this.request("GET", `/sessions/${sessionId}/snapshot`);
  }

  setAutoRun(sessionId: string, running: boolean, ticksPerSecond: number) {
    return this.request<{ running: boolean; ticks_per_second: number }>(
      "POST",
      `/sessions/${sessionId}/run`,
      { running, ticks_per_second: ticksPerSecond },
    );
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request("DELETE", `/sessions/${sessionId}`);
  }
}
