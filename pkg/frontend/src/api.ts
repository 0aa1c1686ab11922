/** Thin client over the simulation service. Every mutation is one POST to
 * the session's command endpoint, so the full command stream stays
 * auditable; reads are plain GETs. */

import type {
  Command,
  CommandResponse,
  InstanceSummary,
  MetricsTable,
  StateView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly body: unknown,
  ) {
    super(message);
  }
}

async function asJson(resp: Response): Promise<unknown> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    const message =
      body && typeof body === "object" && "message" in body
        ? String((body as { message: unknown }).message)
        : `${resp.status} ${resp.statusText}`;
    throw new ApiError(message, resp.status, body);
  }
  return body;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async get(path: string): Promise<unknown> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`);
    return asJson(resp);
  }

  private async post(path: string, body: unknown): Promise<unknown> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return asJson(resp);
  }

  async uploadScenario(doc: unknown): Promise<{ scenarioId: string; scenarioHash: string; name: string }> {
    return (await this.post("/scenarios", doc)) as {
      scenarioId: string;
      scenarioHash: string;
      name: string;
    };
  }

  async createSession(scenarioId: string, seed?: number): Promise<{
    sessionId: string;
    instanceId: string;
    scenarioHash: string;
    status: string;
  }> {
    return (await this.post("/sessions", { scenarioId, seed })) as {
      sessionId: string;
      instanceId: string;
      scenarioHash: string;
      status: string;
    };
  }

  async command(sessionId: string, command: Command): Promise<CommandResponse> {
    return (await this.post(`/sessions/${sessionId}/commands`, command)) as CommandResponse;
  }

  async state(sessionId: string): Promise<StateView> {
    return (await this.get(`/sessions/${sessionId}/state`)) as StateView;
  }

  async history(scenarioHash?: string): Promise<InstanceSummary[]> {
    const query = scenarioHash ? `?scenarioHash=${encodeURIComponent(scenarioHash)}` : "";
    return (await this.get(`/history${query}`)) as InstanceSummary[];
  }

  async label(instanceId: string, label: "good" | "bad" | "unlabeled"): Promise<void> {
    await this.post(`/history/${instanceId}/label`, { label });
  }

  async metrics(scenarioHash: string): Promise<MetricsTable> {
    return (await this.get(
      `/history/metrics?scenarioHash=${encodeURIComponent(scenarioHash)}`,
    )) as MetricsTable;
  }

  /** Server-push subscription; falls back to polling where EventSource is
   * unavailable. Returns an unsubscribe function. */
  subscribe(sessionId: string, onEvent: (type: string, data: unknown) => void): () => void {
    if (typeof EventSource === "undefined") {
      const timer = setInterval(async () => {
        try {
          onEvent("state", await this.state(sessionId));
        } catch {
          // transient poll failure: next tick retries
        }
      }, 500);
      return () => clearInterval(timer);
    }
    const source = new EventSource(`${this.baseUrl}/sessions/${sessionId}/stream`);
    for (const type of ["state", "step", "status", "log", "watch"]) {
      source.addEventListener(type, (event) => {
        onEvent(type, JSON.parse((event as MessageEvent).data));
      });
    }
    return () => source.close();
  }
}
