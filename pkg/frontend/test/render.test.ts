import { describe, expect, it } from 'vitest';

import {
  DesignPoint,
  ErrorPayload,
  RooflineReply,
  ServiceError,
  SweepReply,
  WorkloadReport,
} from '../src/api.js';
import { describeError } from '../src/state.js';
import {
  errorBox,
  layerTable,
  paretoScatter,
  pinnedPanel,
  rooflineView,
  whatIfPanel,
} from '../src/render.js';
import { fixture, lookup, renderedFields } from './helpers.js';

const balance = fixture<DesignPoint>('balance');
const balanceAws = fixture<DesignPoint>('balance_aws');
const report = fixture<WorkloadReport>('report');
const sweep = fixture<SweepReply>('sweep4');
const roofline = fixture<RooflineReply>('roofline');

function assertFieldParity(html: string, reply: unknown): [string, string][] {
  const fields = renderedFields(html);
  expect(fields.length).toBeGreaterThan(0);
  for (const [path, text] of fields) {
    const value = lookup(reply, path);
    expect(value, `panel shows ${path} but the reply has no such field`)
      .not.toBeUndefined();
    expect(text, `rendered ${path} differs from the reply`)
      .toBe(String(value));
  }
  return fields;
}

describe('what-if panel', () => {
  it('renders every number exactly as the service sent it', () => {
    const fields = assertFieldParity(whatIfPanel(balance, null), balance);
    const paths = fields.map(([p]) => p);
    for (const expected of [
      'resources.luts', 'resources.bram18', 'resources.dsps',
      'slack.luts', 'slack.bram18', 'slack.dsps',
      'performance.fps', 'performance.throughput_gops',
      'performance.frame_cycles', 'performance.bottleneck',
    ]) {
      expect(paths).toContain(expected);
    }
    expect(paths.filter(p => /^folding\.\d+\.p$/.test(p)))
      .toHaveLength(balance.folding.length);
    expect(paths.filter(p => /^performance\.stages\.\d+\.cycles$/.test(p)))
      .toHaveLength(balance.performance.stages.length);
  });

  it('carries the feasible flag through as a boolean attribute', () => {
    const html = whatIfPanel(balance, null);
    expect(html).toContain(`data-flag="feasible"\n      data-value="${balance.feasible}"`);
    expect(html).toContain(balance.feasible ? '>feasible<' : '>infeasible<');
  });

  it('is deterministic for a fixed reply', () => {
    expect(whatIfPanel(balance, balanceAws))
      .toBe(whatIfPanel(balance, balanceAws));
    expect(layerTable(report)).toBe(layerTable(report));
    expect(paretoScatter(sweep, [])).toBe(paretoScatter(sweep, []));
  });

  it('shows zero-delta badges when nothing changed', () => {
    const html = whatIfPanel(balance, balance);
    const deltas = [...html.matchAll(/data-delta="([^"]+)"/g)].map(m => m[1]);
    expect(deltas.length).toBeGreaterThan(0);
    expect(deltas.every(d => d === '0')).toBe(true);
  });

  it('marks movement against the previous point', () => {
    const html = whatIfPanel(balanceAws, balance);
    const deltas = [...html.matchAll(/data-delta="([^"]+)"/g)].map(m => m[1]);
    expect(deltas.some(d => d !== '0')).toBe(true);
    // the headline numbers stay the new reply's strings, not derived ones
    expect(html).toContain(balanceAws.performance.throughput_gops);
    expect(html).toContain(balanceAws.resources.luts);
    // badge text keeps integer trailing zeros intact
    const lutDiff = parseFloat(balanceAws.resources.luts)
      - parseFloat(balance.resources.luts);
    expect(html).toContain(`+${lutDiff.toFixed(0)}</span>`);
  });
});

describe('layer table', () => {
  it('one row per reported layer, values verbatim', () => {
    const html = layerTable(report);
    assertFieldParity(html, report);
    const rows = html.match(/<tr>/g) ?? [];
    expect(rows.length).toBe(report.layers.length + 1);
    expect(html).toContain(report.total_ops);
  });
});

describe('pareto scatter', () => {
  it('highlighting equals the service frontier flags', () => {
    const html = paretoScatter(sweep, []);
    const seen = new Map<number, boolean>();
    for (const m of html.matchAll(
      /<g class="pt([^"]*)" data-index="(\d+)" data-pareto="(true|false)"/g)) {
      const classes = m[1] ?? '';
      const index = Number(m[2]);
      const flagged = m[3] === 'true';
      expect(classes.includes(' pareto')).toBe(flagged);
      seen.set(index, flagged);
    }
    expect(seen.size).toBe(sweep.points.length);
    sweep.points.forEach((point, i) => {
      expect(seen.get(i), `point ${i} highlight`).toBe(point.pareto);
    });
  });

  it('pinned points get the pin ring', () => {
    const point = sweep.points[0]!;
    const html = paretoScatter(sweep, [point]);
    expect(html).toMatch(/class="pt pareto pinned" data-index="0"/);
  });

  it('a failed point turns into an inline error, not a mark', () => {
    const broken: SweepReply = {
      network: sweep.network,
      points: [
        sweep.points[0]!,
        {
          platform: 'pynq-z1', w_bits: '8', a_bits: '8',
          arch_request: 'df', pareto: false,
          error: 'dataflow does not fit, offload required',
        },
      ],
    };
    const html = paretoScatter(broken, []);
    expect(html).toContain('dataflow does not fit, offload required');
    expect(html.match(/<g class="pt/g) ?? []).toHaveLength(1);
  });
});

describe('pinned comparison', () => {
  it('lists both points verbatim with per-resource deltas', () => {
    const pins = [sweep.points[0]!, sweep.points[2]!];
    const html = pinnedPanel(pins);
    assertFieldParity(html, { pinned: pins });
    expect(html).toContain('pin2');
    const deltas = [...html.matchAll(/data-delta="([^"]+)"/g)];
    expect(deltas.length).toBeGreaterThan(0);
  });

  it('handles the empty state', () => {
    expect(pinnedPanel([])).toContain('no pinned points');
  });
});

describe('roofline view', () => {
  it('chart plus a table of the exact service numbers', () => {
    const html = rooflineView(roofline);
    assertFieldParity(html, roofline);
    const paths = renderedFields(html).map(([p]) => p);
    expect(paths.filter(p => p.endsWith('attainable_gops')))
      .toHaveLength(roofline.points.length);
    expect(html).toContain('path class="roof compute"');
    expect(html).toContain('path class="attainable"');
  });
});

describe('error box', () => {
  it('shows a domain error payload word for word', () => {
    const payload = fixture<ErrorPayload>('error422');
    const err = new ServiceError(422, payload);
    const html = errorBox(describeError(err));
    expect(html).toContain(payload.error);
    expect(html).toContain(String(payload.detail));
  });
});
