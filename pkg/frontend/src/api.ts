/** Typed client for the chat service HTTP API. */

export interface TurnTrace {
  module: string;
  topic: string | null;
  state: string | null;
  intent: string | null;
  confident: boolean;
  profane: boolean;
}

export interface TurnResponse {
  response: string;
  trace: TurnTrace;
  turn_counter: number;
  steps: string[];
}

export interface RatingAck {
  ok: boolean;
  stars: number;
  topics_visited: string[];
}

export interface MetricsRow {
  topic: string;
  rating: number | null;
  seconds: number | null;
  turns: number | null;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, `network error: ${String(err)}`);
  }
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    /* non-JSON body: fall through to the status check */
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

export class ChatApi {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(userId?: string): Promise<string> {
    const body = userId ? { user_id: userId } : {};
    const data = await request<{ session_id: string }>(this.url("/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return data.session_id;
  }

  async sendTurn(sessionId: string, text: string): Promise<TurnResponse> {
    return request<TurnResponse>(this.url(`/sessions/${sessionId}/turns`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  async submitRating(sessionId: string, stars: number): Promise<RatingAck> {
    return request<RatingAck>(this.url(`/sessions/${sessionId}/rating`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ stars }),
    });
  }

  async getMetrics(): Promise<{ topics: MetricsRow[] }> {
    return request<{ topics: MetricsRow[] }>(this.url("/metrics"));
  }

  async health(): Promise<boolean> {
    try {
      const data = await request<{ ok: boolean }>(this.url("/healthz"));
      return data.ok === true;
    } catch {
      return false;
    }
  }
}
