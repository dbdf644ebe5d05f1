// Thin typed client over the steering-service HTTP API.

import type {
  ApiError,
  CreateSessionPayload,
  ParseResponse,
  SessionCreated,
  StepView,
  TltDump,
} from "./types.js";

export class ApiFailure extends Error {
  readonly status: number;
  readonly detail: ApiError;

  constructor(status: number, detail: ApiError) {
    super(`${detail.code}: ${detail.message}`);
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiFailure(response.status, body as ApiError);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createSession(payload: CreateSessionPayload): Promise<SessionCreated> {
    return this.post("/sessions", payload);
  }

  getSession(id: string): Promise<StepView> {
    return this.request(`/sessions/${id}`);
  }

  step(id: string, input: number, successor?: number): Promise<StepView> {
    const payload: { input: number; successor?: number } = { input };
    if (successor !== undefined) payload.successor = successor;
    return this.post(`/sessions/${id}/step`, payload);
  }

  fork(id: string): Promise<SessionCreated> {
    return this.post(`/sessions/${id}/fork`, {});
  }

  updateSpec(id: string, formula: string): Promise<StepView> {
    return this.post(`/sessions/${id}/spec`, { formula });
  }

  parse(formula: string): Promise<ParseResponse> {
    return this.post("/parse", { formula });
  }

  tlt(id: string): Promise<TltDump> {
    return this.request(`/sessions/${id}/tlt`);
  }
}
