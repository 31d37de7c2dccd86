/**
 * Typed client for the scoring service.
 *
 * At most one request is in flight per endpoint: a newer call aborts the
 * previous one (latest wins), so a slow old response can never overwrite a
 * newer form state.
 */

import type {
  CounterfactualResult,
  FieldError,
  ProfileBody,
  Schema,
  ScoreResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public errors: FieldError[],
    message?: string,
  ) {
    super(message ?? `request failed with ${status}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private controllers = new Map<string, AbortController>();

  constructor(
    private baseUrl = '',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, body?: unknown): Promise<T> {
    this.controllers.get(path)?.abort();
    const controller = new AbortController();
    this.controllers.set(path, controller);
    const response = await this.fetchFn(this.baseUrl + path, {
      method: body === undefined ? 'GET' : 'POST',
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
      signal: controller.signal,
    });
    if (this.controllers.get(path) === controller) {
      this.controllers.delete(path);
    }
    if (!response.ok) {
      let errors: FieldError[] = [];
      let detail: string | undefined;
      try {
        const payload = await response.json();
        errors = payload.errors ?? [];
        detail = payload.detail;
      } catch {
        // non-JSON error body: keep the status only
      }
      throw new ApiError(response.status, errors, detail);
    }
    return (await response.json()) as T;
  }

  getSchema(): Promise<Schema> {
    return this.request<Schema>('/api/schema');
  }

  score(profile: ProfileBody): Promise<ScoreResponse> {
    return this.request<ScoreResponse>('/api/score', profile);
  }

  whatIf(profile: ProfileBody, overrides: Record<string, number | boolean>): Promise<ScoreResponse> {
    return this.request<ScoreResponse>('/api/whatif', { profile, overrides });
  }

  counterfactual(profile: ProfileBody, target?: string): Promise<CounterfactualResult> {
    const body = target ? { profile, target } : { profile };
    return this.request<CounterfactualResult>('/api/counterfactual', body);
  }
}

export function isAbort(error: unknown): boolean {
  return error instanceof DOMException && error.name === 'AbortError';
}
