import { describe, expect, it } from 'vitest';

import {
  DesignPoint,
  EstimationApi,
  ServiceError,
  SweepReply,
  UploadReply,
  WorkloadReport,
} from '../src/api.js';
import { ExplorerStore, stableStringify } from '../src/state.js';
import { fixture } from './helpers.js';

const balance = fixture<DesignPoint>('balance');
const balanceAws = fixture<DesignPoint>('balance_aws');
const report = fixture<WorkloadReport>('report');
const upload = fixture<UploadReply>('upload');
const sweep = fixture<SweepReply>('sweep4');

function unused(name: string) {
  return () => Promise.reject(new Error(`unexpected call: ${name}`));
}

function stubClient(overrides: Partial<EstimationApi>): EstimationApi {
  return {
    upload: unused('upload'),
    report: unused('report'),
    runPasses: unused('runPasses'),
    balance: unused('balance'),
    estimate: unused('estimate'),
    platforms: unused('platforms'),
    roofline: unused('roofline'),
    sweep: unused('sweep'),
    ...overrides,
  };
}

async function loadedStore(overrides: Partial<EstimationApi>) {
  const client = stubClient({
    upload: () => Promise.resolve(upload),
    report: () => Promise.resolve(report),
    ...overrides,
  });
  const store = new ExplorerStore(client);
  expect(await store.loadNetwork('{}')).toBe(true);
  return store;
}

describe('loading a network', () => {
  it('populates session and report', async () => {
    const store = await loadedStore({});
    expect(store.session).toBe(upload.session);
    expect(store.networkName).toBe(upload.name);
    expect(store.report).toEqual(report);
    expect(store.lastError).toBeNull();
  });

  it('a malformed file changes nothing but the diagnostic', async () => {
    const bad = new ServiceError(422, {
      error: 'bad-topology', detail: 'layer 3: unknown type "donv"',
    });
    let reject = false;
    const store = await loadedStore({
      upload: () => reject ? Promise.reject(bad) : Promise.resolve(upload),
    });

    reject = true;
    expect(await store.loadNetwork('garbage')).toBe(false);
    expect(store.session).toBe(upload.session);
    expect(store.report).toEqual(report);
    expect(store.lastError).toBe('bad-topology: layer 3: unknown type "donv"');
  });

  it('reloading the same file reproduces the same state', async () => {
    const store = await loadedStore({});
    const before = { session: store.session, report: store.report };
    expect(await store.loadNetwork('{}')).toBe(true);
    expect(store.session).toBe(before.session);
    expect(store.report).toEqual(before.report);
  });
});

describe('what-if requests', () => {
  it('balance reply becomes the point, old point the previous', async () => {
    const replies = [balance, balanceAws];
    const store = await loadedStore({
      balance: () => Promise.resolve(replies.shift()!),
    });
    expect(await store.whatIf({ platform: 'pynq-z1' })).toBe('applied');
    expect(store.point).toEqual(balance);
    expect(store.previous).toBeNull();

    expect(await store.whatIf({ platform: 'aws-f1' })).toBe('applied');
    expect(store.point).toEqual(balanceAws);
    expect(store.previous).toEqual(balance);
  });

  it('a precision change runs the pass pipeline before estimating', async () => {
    const calls: string[][] = [];
    const store = await loadedStore({
      runPasses: (_sid, passes) => {
        calls.push(['passes', ...passes]);
        return Promise.resolve({ passes, log: ['set_precision: retagged'],
          topology: {}, snapshot: null });
      },
      report: (_sid, passes) => {
        calls.push(['report', ...(passes ?? [])]);
        return Promise.resolve(report);
      },
      balance: (_sid, _platform, passes) => {
        calls.push(['balance', ...passes]);
        return Promise.resolve(balance);
      },
    });
    expect(await store.whatIf({ precision: { w: 2, a: 2 } })).toBe('applied');
    const wanted = ['streamline', 'reorder_maxpool', 'set_precision:2/2'];
    expect(calls).toContainEqual(['passes', ...wanted]);
    expect(calls).toContainEqual(['balance', ...wanted]);
    expect(store.passLog).toEqual(['set_precision: retagged']);
  });

  it('an arch toggle re-prices the current folding via estimate', async () => {
    let estimateArgs: unknown[] = [];
    const store = await loadedStore({
      balance: () => Promise.resolve(balance),
      estimate: (...args: unknown[]) => {
        estimateArgs = args;
        const { performance: _perf, ...rest } = balance;
        return Promise.resolve({ ...rest, budget: balance.resources });
      },
    });
    await store.whatIf({});
    expect(await store.whatIf({ arch: 'mo' })).toBe('applied');
    expect(estimateArgs[2]).toBe('mo');
    expect(estimateArgs[4]).toEqual(balance.folding);
  });

  it('a service rejection keeps the point and surfaces the payload', async () => {
    const err = new ServiceError(422, {
      error: 'unknown-platform', detail: 'no entry named zync-7099',
    });
    let fail = false;
    const store = await loadedStore({
      balance: () => fail
        ? Promise.reject(err)
        : Promise.resolve(balance),
    });
    await store.whatIf({});
    fail = true;
    expect(await store.whatIf({ platform: 'zync-7099' })).toBe('error');
    expect(store.point).toEqual(balance);
    expect(store.lastError).toBe('unknown-platform: no entry named zync-7099');
  });
});

describe('stale responses', () => {
  it('an older reply arriving late is discarded', async () => {
    const pending: ((d: DesignPoint) => void)[] = [];
    const store = await loadedStore({
      balance: () => new Promise(resolve => { pending.push(resolve); }),
    });

    const first = store.whatIf({ platform: 'pynq-z1' });
    const second = store.whatIf({ platform: 'aws-f1' });
    expect(pending).toHaveLength(2);

    pending[1]!(balanceAws);
    expect(await second).toBe('applied');
    expect(store.point).toEqual(balanceAws);

    pending[0]!(balance);
    expect(await first).toBe('stale');
    expect(store.point).toEqual(balanceAws);
    expect(store.previous).toBeNull();
    expect(store.platform).toBe('aws-f1');
  });

  it('an older failure is also discarded silently', async () => {
    let call = 0;
    const pending: { resolve: (d: DesignPoint) => void;
      reject: (e: Error) => void }[] = [];
    const store = await loadedStore({
      balance: () => new Promise((resolve, reject) => {
        pending.push({ resolve, reject });
        call += 1;
      }),
    });
    const first = store.whatIf({});
    const second = store.whatIf({});
    expect(call).toBe(2);

    pending[1]!.resolve(balance);
    expect(await second).toBe('applied');
    pending[0]!.reject(new Error('socket closed'));
    expect(await first).toBe('stale');
    expect(store.lastError).toBeNull();
    expect(store.point).toEqual(balance);
  });
});

describe('sweeps and pins', () => {
  it('pins toggle and export reproduces the points verbatim', async () => {
    const store = await loadedStore({
      sweep: () => Promise.resolve(sweep),
    });
    expect(await store.runSweep(['pynq-z1', 'aws-f1'], [[1, 1], [2, 2]],
      ['auto'])).toBe(true);
    store.togglePin(0);
    store.togglePin(2);
    expect(store.pinned).toEqual([sweep.points[0], sweep.points[2]]);

    const text = store.exportPinned();
    expect(text.endsWith('\n')).toBe(true);
    const doc = JSON.parse(text);
    expect(doc.network).toBe(sweep.network);
    expect(doc.points).toEqual([sweep.points[0], sweep.points[2]]);

    store.togglePin(0);
    expect(store.pinned).toEqual([sweep.points[2]]);
  });

  it('export writes sorted keys, like the structured format', () => {
    const text = stableStringify({ b: '2', a: { d: '4', c: '3' } });
    expect(text.indexOf('"a"')).toBeLessThan(text.indexOf('"b"'));
    expect(text.indexOf('"c"')).toBeLessThan(text.indexOf('"d"'));
    expect(JSON.parse(text)).toEqual({ a: { c: '3', d: '4' }, b: '2' });
  });
});
