import {
  AnyPoint,
  DesignPoint,
  EstimationApi,
  ServiceError,
  SweepPoint,
  SweepReply,
  WorkloadReport,
} from './api.js';

export type Arch = 'auto' | 'df' | 'mo';

export interface Precision {
  w: number;
  a: number;
}

export interface WhatIfChange {
  platform?: string;
  precision?: Precision | null;
  arch?: Arch;
}

export type WhatIfOutcome = 'applied' | 'stale' | 'error';

// Passes the bundled networks need before estimation; a precision override
// appends a retargeting pass on top.
const BASE_PASSES = ['streamline', 'reorder_maxpool'];

export function describeError(err: unknown): string {
  if (err instanceof ServiceError) return err.message;
  if (err instanceof Error) return err.message;
  return String(err);
}

/**
 * All client-side state of the explorer. Every number it holds is a decimal
 * string copied from a service reply; the store never computes cost or
 * performance figures itself.
 *
 * Concurrency: one what-if is authoritative at a time. Each request takes a
 * ticket from a monotone counter and a reply only lands if its ticket is
 * still the newest, so a slow older response cannot overwrite a newer one.
 */
export class ExplorerStore {
  session: string | null = null;
  networkName = '';
  report: WorkloadReport | null = null;
  passLog: string[] = [];
  platform = 'pynq-z1';
  precision: Precision | null = null;
  arch: Arch = 'auto';
  point: AnyPoint | null = null;
  previous: AnyPoint | null = null;
  sweep: SweepReply | null = null;
  pinned: SweepPoint[] = [];
  lastError: string | null = null;

  private seq = 0;
  private sweepSeq = 0;

  constructor(private client: EstimationApi) {}

  passes(): string[] {
    const out = [...BASE_PASSES];
    if (this.precision) {
      out.push(`set_precision:${this.precision.w}/${this.precision.a}`);
    }
    return out;
  }

  // Upload and report; a rejected file leaves the current network intact.
  async loadNetwork(text: string, fmt?: string): Promise<boolean> {
    try {
      const up = await this.client.upload(text, fmt);
      const report = await this.client.report(up.session, this.passes());
      this.session = up.session;
      this.networkName = up.name;
      this.report = report;
      this.passLog = [];
      this.point = null;
      this.previous = null;
      this.sweep = null;
      this.pinned = [];
      this.lastError = null;
      return true;
    } catch (err) {
      this.lastError = describeError(err);
      return false;
    }
  }

  async whatIf(change: WhatIfChange): Promise<WhatIfOutcome> {
    if (!this.session) {
      this.lastError = 'no network loaded';
      return 'error';
    }
    if (change.platform !== undefined) this.platform = change.platform;
    if (change.arch !== undefined) this.arch = change.arch;
    const precisionChanged = change.precision !== undefined;
    if (change.precision !== undefined) this.precision = change.precision;

    const ticket = ++this.seq;
    const session = this.session;
    const passes = this.passes();
    try {
      let log: string[] | null = null;
      let report: WorkloadReport | null = null;
      if (precisionChanged) {
        const [passed, rep] = await Promise.all([
          this.client.runPasses(session, passes),
          this.client.report(session, passes),
        ]);
        log = passed.log;
        report = rep;
      }
      const reply = await this.refresh(session, passes);
      if (ticket !== this.seq) return 'stale';
      if (log !== null) this.passLog = log;
      if (report !== null) this.report = report;
      this.previous = this.point;
      this.point = reply;
      this.lastError = null;
      return 'applied';
    } catch (err) {
      if (ticket !== this.seq) return 'stale';
      this.lastError = describeError(err);
      return 'error';
    }
  }

  private refresh(session: string, passes: string[]): Promise<AnyPoint> {
    if (this.arch === 'auto') {
      return this.client.balance(session, this.platform, passes);
    }
    // Re-price the folding the last search settled on under the chosen
    // architecture; without one the service defaults to minimal folding.
    return this.client.estimate(session, this.platform, this.arch, passes,
      this.point ? this.point.folding : undefined);
  }

  async runSweep(platforms: string[], pairs: [number, number][],
      archs: string[]): Promise<boolean> {
    if (!this.session) {
      this.lastError = 'no network loaded';
      return false;
    }
    const ticket = ++this.sweepSeq;
    try {
      const reply = await this.client.sweep(this.session, platforms, pairs,
        archs, this.passes());
      if (ticket !== this.sweepSeq) return false;
      this.sweep = reply;
      this.pinned = [];
      this.lastError = null;
      return true;
    } catch (err) {
      if (ticket !== this.sweepSeq) return false;
      this.lastError = describeError(err);
      return false;
    }
  }

  togglePin(index: number): void {
    const point = this.sweep?.points[index];
    if (!point) return;
    const at = this.pinned.indexOf(point);
    if (at >= 0) this.pinned.splice(at, 1);
    else this.pinned.push(point);
  }

  // Pinned points re-serialized the way the service writes structured
  // output: sorted keys, two-space indent, numbers still decimal strings.
  exportPinned(): string {
    const doc = {
      network: this.sweep ? this.sweep.network : this.networkName,
      points: this.pinned,
    };
    return stableStringify(doc) + '\n';
  }
}

export function stableStringify(value: unknown, indent = 2): string {
  const pad = (depth: number) => ' '.repeat(indent * depth);
  const walk = (node: unknown, depth: number): string => {
    if (node === null || typeof node !== 'object') {
      return JSON.stringify(node);
    }
    if (Array.isArray(node)) {
      if (node.length === 0) return '[]';
      const rows = node.map(item => pad(depth + 1) + walk(item, depth + 1));
      return '[\n' + rows.join(',\n') + '\n' + pad(depth) + ']';
    }
    const entries = Object.entries(node as Record<string, unknown>)
      .filter(([, v]) => v !== undefined)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
    if (entries.length === 0) return '{}';
    const rows = entries.map(([key, v]) =>
      `${pad(depth + 1)}${JSON.stringify(key)}: ${walk(v, depth + 1)}`);
    return '{\n' + rows.join(',\n') + '\n' + pad(depth) + '}';
  };
  return walk(value, 0);
}

export function isDesignPoint(point: AnyPoint): point is DesignPoint {
  return (point as DesignPoint).performance !== undefined;
}
