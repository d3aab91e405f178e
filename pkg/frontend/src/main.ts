import { ServiceClient } from './api.js';
import { ExplorerStore, Arch, Precision } from './state.js';
import {
  errorBox,
  layerTable,
  paretoScatter,
  passLogView,
  pinnedPanel,
  rooflineView,
  whatIfPanel,
} from './render.js';

// DOM wiring only; everything renderable lives in render.ts and all state
// in state.ts so the tests can run without a browser.

const client = new ServiceClient('');
const store = new ExplorerStore(client);

const $ = (id: string) => document.getElementById(id) as HTMLElement;

const PRECISION_CHOICES: [string, Precision | null][] = [
  ['as imported', null],
  ['1/1', { w: 1, a: 1 }],
  ['1/2', { w: 1, a: 2 }],
  ['2/2', { w: 2, a: 2 }],
  ['4/4', { w: 4, a: 4 }],
  ['8/8', { w: 8, a: 8 }],
];

const SWEEP_PAIRS: [number, number][] = [[1, 1], [1, 2], [2, 2], [4, 4], [8, 8]];

function renderNetwork(): void {
  $('layer-panel').innerHTML = store.report ? layerTable(store.report) : '';
  $('pass-log').innerHTML = passLogView(store.passLog);
}

function renderPoint(): void {
  $('whatif-panel').innerHTML = store.point
    ? whatIfPanel(store.point, store.previous)
    : '<p class="hint">load a network to see estimates</p>';
}

function renderSweep(): void {
  $('pareto-panel').innerHTML = store.sweep
    ? paretoScatter(store.sweep, store.pinned)
    : '<p class="hint">run a sweep to map the space</p>';
  $('pinned-panel').innerHTML = pinnedPanel(store.pinned);
}

function renderError(): void {
  $('errors').innerHTML = store.lastError ? errorBox(store.lastError) : '';
}

async function refreshRoofline(): Promise<void> {
  const { w, a } = store.precision ?? { w: 1, a: 1 };
  try {
    const reply = await client.roofline(store.platform, w, a);
    $('roofline-panel').innerHTML = rooflineView(reply);
  } catch {
    $('roofline-panel').innerHTML = '';
  }
}

async function applyChange(change: {
  platform?: string; precision?: Precision | null; arch?: Arch;
}): Promise<void> {
  const outcome = await store.whatIf(change);
  if (outcome === 'stale') return;
  renderNetwork();
  renderPoint();
  renderError();
  if (change.platform !== undefined || change.precision !== undefined) {
    void refreshRoofline();
  }
}

async function boot(): Promise<void> {
  try {
    const { platforms } = await client.platforms();
    const select = $('platform') as HTMLSelectElement;
    select.innerHTML = platforms.map(p =>
      `<option value="${p.name}">${p.name}</option>`).join('');
    if (platforms.some(p => p.name === store.platform)) {
      select.value = store.platform;
    } else if (platforms[0]) {
      store.platform = platforms[0].name;
    }
  } catch (err) {
    $('errors').innerHTML = errorBox(
      `service unreachable: ${err instanceof Error ? err.message : err}`);
    return;
  }

  const precision = $('precision') as HTMLSelectElement;
  precision.innerHTML = PRECISION_CHOICES.map(([label], i) =>
    `<option value="${i}">${label}</option>`).join('');

  $('network-file').addEventListener('change', async event => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    const ok = await store.loadNetwork(await file.text());
    renderError();
    if (!ok) return;
    renderNetwork();
    await applyChange({});
    void refreshRoofline();
  });

  $('platform').addEventListener('change', event => {
    void applyChange({ platform: (event.target as HTMLSelectElement).value });
  });

  precision.addEventListener('change', event => {
    const idx = Number((event.target as HTMLSelectElement).value);
    void applyChange({ precision: PRECISION_CHOICES[idx]?.[1] ?? null });
  });

  document.querySelectorAll('input[name="arch"]').forEach(radio => {
    radio.addEventListener('change', event => {
      const value = (event.target as HTMLInputElement).value as Arch;
      void applyChange({ arch: value });
    });
  });

  $('run-sweep').addEventListener('click', async () => {
    const select = $('platform') as HTMLSelectElement;
    const names = Array.from(select.options).map(o => o.value);
    const ok = await store.runSweep(names, SWEEP_PAIRS, ['auto']);
    renderError();
    if (ok) renderSweep();
  });

  $('pareto-panel').addEventListener('click', event => {
    const group = (event.target as Element).closest('g.pt');
    if (!group) return;
    store.togglePin(Number(group.getAttribute('data-index')));
    renderSweep();
  });

  $('export-pins').addEventListener('click', () => {
    if (!store.pinned.length) return;
    const blob = new Blob([store.exportPinned()],
      { type: 'application/json' });
    const url = URL.createObjectURL(blob);
    const a = document.createElement('a');
    a.href = url;
    a.download = `${store.networkName || 'design'}-pins.json`;
    a.click();
    URL.revokeObjectURL(url);
  });

  renderPoint();
  renderSweep();
}

void boot();
