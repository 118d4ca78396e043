// HTTP client for the study host. Requests are serialized FIFO — at most one
// in flight per session — so the server sees gestures in gesture order.

import type { ClientEvent, ConfirmOutcome, ViewPayload } from './types';

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  private queue: Promise<unknown> = Promise.resolve();
  private batchCounter = 0;

  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => fetch(...(args as [string])),
  ) {}

  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const result = this.queue.then(work, work);
    // Keep the chain alive even when a request fails.
    this.queue = result.catch(() => undefined);
    return result;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `${method} ${path} -> ${response.status}`);
    }
    return (await response.json()) as T;
  }

  createSession(studyId: string): Promise<{ pseudonym: string; view: ViewPayload }> {
    return this.enqueue(() => this.request('POST', `/study/${studyId}/session`));
  }

  getView(pseudonym: string): Promise<{ view: ViewPayload }> {
    return this.enqueue(() => this.request('GET', `/session/${pseudonym}/view`));
  }

  sendEvents(pseudonym: string, events: ClientEvent[]):
      Promise<{ results: Record<string, unknown>[]; view: ViewPayload }> {
    const batchId = `b-${++this.batchCounter}`;
    return this.enqueue(() =>
      this.request('POST', `/session/${pseudonym}/events`,
                   { batch_id: batchId, events }));
  }

  confirm(pseudonym: string): Promise<{ outcome: ConfirmOutcome; view: ViewPayload }> {
    return this.enqueue(() => this.request('POST', `/session/${pseudonym}/confirm`));
  }

  skip(pseudonym: string): Promise<{ view: ViewPayload }> {
    return this.enqueue(() => this.request('POST', `/session/${pseudonym}/skip`));
  }
}
