// Thin typed client over the session service routes. All requests carry the
// seat token; errors become ApiError with the server's detail text.

import { FetchLike, Phase, SeatState } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

export class SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly sessionId: string,
    private readonly token: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}/sessions/${this.sessionId}${path}`;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.url(path), {
      ...init,
      headers: {
        "Content-Type": "application/json",
        "X-Seat-Token": this.token,
        ...(init?.headers ?? {}),
      },
    });
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // keep the generic detail
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  join(): Promise<SeatState> {
    return this.request<SeatState>("/join", {
      method: "POST",
      body: JSON.stringify({ token: this.token }),
    });
  }

  state(): Promise<SeatState> {
    return this.request<SeatState>("/state");
  }

  submitChoice(part: number, round: number, action: string): Promise<{ phase: Phase }> {
    return this.request<{ phase: Phase }>("/choice", {
      method: "POST",
      body: JSON.stringify({ part, round, action }),
    });
  }

  ackFeedback(part: number, round: number): Promise<{ phase: Phase }> {
    return this.request<{ phase: Phase }>("/ack", {
      method: "POST",
      body: JSON.stringify({ part, round }),
    });
  }
}
