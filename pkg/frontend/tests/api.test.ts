import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError, type FetchLike } from '../src/api';

interface Call {
  url: string;
  method?: string;
  body?: string;
}

/** Fetch stub that resolves when released, to observe request ordering. */
function gatedFetch() {
  const calls: Call[] = [];
  let inFlight = 0;
  let maxInFlight = 0;
  const releases: (() => void)[] = [];
  const fetchImpl: FetchLike = (url, init) => {
    calls.push({ url, method: init?.method, body: init?.body });
    inFlight += 1;
    maxInFlight = Math.max(maxInFlight, inFlight);
    return new Promise((resolve) => {
      releases.push(() => {
        inFlight -= 1;
        resolve({ ok: true, status: 200, json: async () => ({ view: {} }) });
      });
    });
  };
  return {
    fetchImpl,
    calls,
    // Waits for the next request to be issued, then lets it complete.
    release: async () => {
      while (releases.length === 0) {
        await new Promise((resolve) => setTimeout(resolve, 0));
      }
      releases.shift()!();
    },
    maxInFlight: () => maxInFlight,
  };
}

describe('request serialization', () => {
  it('keeps at most one request in flight, FIFO', async () => {
    const gate = gatedFetch();
    const api = new ApiClient('http://h', gate.fetchImpl);
    const a = api.getView('p');
    const b = api.sendEvents('p', [{ op: 'toggle_switch', args: { switch_id: 's0' } }]);
    const c = api.skip('p');
    // Only the first request has been issued so far.
    await Promise.resolve();
    expect(gate.calls.map((c) => c.url)).toEqual(['http://h/session/p/view']);
    await gate.release();
    await a;
    await gate.release();
    await b;
    await gate.release();
    await c;
    expect(gate.calls.map((c) => c.url)).toEqual([
      'http://h/session/p/view',
      'http://h/session/p/events',
      'http://h/session/p/skip',
    ]);
    expect(gate.maxInFlight()).toBe(1);
  });

  it('a failed request does not stall the queue', async () => {
    let first = true;
    const fetchImpl: FetchLike = async () => {
      if (first) {
        first = false;
        return { ok: false, status: 500, json: async () => ({}) };
      }
      return { ok: true, status: 200, json: async () => ({ view: {} }) };
    };
    const api = new ApiClient('http://h', fetchImpl);
    await expect(api.getView('p')).rejects.toThrow(ApiError);
    await expect(api.getView('p')).resolves.toEqual({ view: {} });
  });
});

describe('request shapes', () => {
  it('events go as a JSON batch with a fresh batch id each time', async () => {
    const bodies: string[] = [];
    const fetchImpl: FetchLike = async (_url, init) => {
      bodies.push(init?.body ?? '');
      return { ok: true, status: 200, json: async () => ({ results: [], view: {} }) };
    };
    const api = new ApiClient('', fetchImpl);
    await api.sendEvents('p', [{ op: 'draw_cleared', args: {} }]);
    await api.sendEvents('p', [{ op: 'draw_cleared', args: {} }]);
    const parsed = bodies.map((b) => JSON.parse(b));
    expect(parsed[0].events).toEqual([{ op: 'draw_cleared', args: {} }]);
    expect(parsed[0].batch_id).not.toBe(parsed[1].batch_id);
  });

  it('confirm posts to the dedicated endpoint with no body', async () => {
    const calls: Call[] = [];
    const fetchImpl: FetchLike = async (url, init) => {
      calls.push({ url, method: init?.method, body: init?.body });
      return { ok: true, status: 200, json: async () => ({ outcome: {}, view: {} }) };
    };
    const api = new ApiClient('', fetchImpl);
    await api.confirm('p');
    expect(calls).toEqual([
      { url: '/session/p/confirm', method: 'POST', body: undefined },
    ]);
  });
});
