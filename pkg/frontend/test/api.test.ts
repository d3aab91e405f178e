import { describe, expect, it } from 'vitest';

import { ServiceClient, ServiceError } from '../src/api.js';

interface Seen {
  url: string;
  init?: RequestInit;
}

function clientWith(body: string, status = 200): { client: ServiceClient; seen: Seen[] } {
  const seen: Seen[] = [];
  const client = new ServiceClient('http://svc', (url, init) => {
    seen.push({ url, init });
    return Promise.resolve(new Response(body, {
      status,
      headers: { 'content-type': 'application/json' },
    }));
  });
  return { client, seen };
}

describe('request shapes', () => {
  it('upload posts the topology text', async () => {
    const { client, seen } = clientWith('{"session":"s","name":"n","layer_count":"3"}');
    await client.upload('{"name": "t"}');
    expect(seen[0]!.url).toBe('http://svc/networks');
    expect(seen[0]!.init?.method).toBe('POST');
    expect(JSON.parse(seen[0]!.init!.body as string))
      .toEqual({ topology: '{"name": "t"}' });
  });

  it('report encodes the pass list into the query', async () => {
    const { client, seen } = clientWith('{}');
    await client.report('abc123', ['streamline', 'set_precision:2/2']);
    expect(seen[0]!.url)
      .toBe('http://svc/networks/abc123/report?passes=streamline%2Cset_precision%3A2%2F2');
  });

  it('estimate includes folding only when given', async () => {
    const { client, seen } = clientWith('{}');
    await client.estimate('s', 'pynq-z1', 'mo', ['streamline']);
    await client.estimate('s', 'pynq-z1', 'df', ['streamline'],
      [{ layer: 'conv0', p: '2', q: '3', m: '1' }]);
    const first = JSON.parse(seen[0]!.init!.body as string);
    const second = JSON.parse(seen[1]!.init!.body as string);
    expect(first.folding).toBeUndefined();
    expect(second.folding).toEqual([{ layer: 'conv0', p: '2', q: '3', m: '1' }]);
  });

  it('sweep carries platforms, pairs, archs and passes', async () => {
    const { client, seen } = clientWith('{"network":"n","points":[]}');
    await client.sweep('s', ['pynq-z1'], [[1, 1], [2, 2]], ['auto'],
      ['streamline']);
    expect(JSON.parse(seen[0]!.init!.body as string)).toEqual({
      session: 's', platforms: ['pynq-z1'], pairs: [[1, 1], [2, 2]],
      archs: ['auto'], passes: ['streamline'],
    });
  });
});

describe('error mapping', () => {
  it('a JSON error payload becomes a ServiceError with the payload', async () => {
    const { client } = clientWith(
      '{"error": "indivisible-folding", "detail": "conv1: (1,5,1)"}', 422);
    const err = await client.balance('s', 'p', []).catch(e => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.status).toBe(422);
    expect(err.payload.error).toBe('indivisible-folding');
    expect(err.message).toBe('indivisible-folding: conv1: (1,5,1)');
  });

  it('a non-JSON failure keeps the body text', async () => {
    const { client } = clientWith('bad gateway', 502);
    const err = await client.platforms().catch(e => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.payload).toEqual({ error: 'bad gateway' });
  });
});
