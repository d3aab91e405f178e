import {
  AnyPoint,
  LayerRow,
  Num,
  RooflineReply,
  SweepPoint,
  SweepReply,
  WorkloadReport,
} from './api.js';
import { isDesignPoint } from './state.js';

// Every view returns an HTML string. Service numbers are written into the
// page verbatim inside elements tagged data-field="<path into the reply>";
// the parity test walks those tags. Arithmetic below is presentation only:
// bar widths, chart coordinates, and the delta badges between two replies.

export function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function field(path: string, value: string, cls = ''): string {
  const klass = cls ? ` class="${cls}"` : '';
  return `<span${klass} data-field="${esc(path)}">${esc(value)}</span>`;
}

function cellField(path: string, value: string, cls = ''): string {
  const klass = cls ? ` class="${cls}"` : '';
  return `<td${klass} data-field="${esc(path)}">${esc(value)}</td>`;
}

// ---- layer table ----

const LAYER_COLUMNS: [keyof LayerRow, string][] = [
  ['layer', 'layer'],
  ['w_bits', 'W'],
  ['a_bits', 'A'],
  ['macs', 'MACs'],
  ['ops', 'ops'],
  ['weight_count', 'params'],
  ['weight_mem_bits', 'weight bits'],
  ['activation_mem_bits', 'act bits'],
];

export function layerTable(report: WorkloadReport): string {
  const head = LAYER_COLUMNS.map(([, label]) => `<th>${label}</th>`).join('');
  const body = report.layers.map((row, i) => {
    const cells = LAYER_COLUMNS.map(([key]) =>
      cellField(`layers.${i}.${key}`, row[key])).join('');
    return `<tr>${cells}</tr>`;
  }).join('');
  const chips = Object.entries(report.ops_by_precision)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([pair, ops]) =>
      `<span class="chip">[${esc(pair)}] ` +
      field(`ops_by_precision.${pair}`, ops) + ' ops</span>')
    .join(' ');
  return `
<div class="layer-report">
  <h2>${field('network', report.network)}</h2>
  <table class="layers"><thead><tr>${head}</tr></thead>
  <tbody>${body}</tbody></table>
  <p class="totals">total ${field('total_ops', report.total_ops)} ops,
  ${field('total_params', report.total_params)} params</p>
  <p class="chips">${chips}</p>
</div>`;
}

// ---- what-if panel ----

function trimmed(value: number): string {
  const text = Math.abs(value) >= 100 ? value.toFixed(0) : value.toFixed(2);
  return text.includes('.')
    ? text.replace(/0+$/, '').replace(/\.$/, '')
    : text;
}

// Badge comparing the same field across two replies. Derived, so it carries
// data-delta (not data-field) and never replaces the verbatim value.
function deltaBadge(now: Num | undefined, before: Num | undefined): string {
  if (now === undefined || before === undefined) return '';
  const diff = parseFloat(now) - parseFloat(before);
  if (diff === 0) return '<span class="delta zero" data-delta="0">&#177;0</span>';
  const cls = diff > 0 ? 'delta up' : 'delta down';
  const sign = diff > 0 ? '+' : '&#8722;';
  return `<span class="${cls}" data-delta="${diff}">${sign}${trimmed(Math.abs(diff))}</span>`;
}

interface BarSpec {
  key: 'luts' | 'bram18' | 'dsps';
  label: string;
}

const BARS: BarSpec[] = [
  { key: 'luts', label: 'LUT' },
  { key: 'bram18', label: 'BRAM18' },
  { key: 'dsps', label: 'DSP' },
];

function resourceBars(point: AnyPoint, previous: AnyPoint | null): string {
  const rows = BARS.map(({ key, label }) => {
    const used = point.resources[key];
    const slack = point.slack[key];
    // used + slack spans the usable budget, both straight off the reply
    const usable = parseFloat(used) + parseFloat(slack);
    const pct = usable > 0 ? (parseFloat(used) / usable) * 100 : 100;
    const over = parseFloat(slack) < 0;
    const width = Math.min(Math.max(pct, 0), 100).toFixed(1);
    const badge = deltaBadge(point.resources[key], previous?.resources[key]);
    return `
  <div class="bar-row${over ? ' over' : ''}">
    <span class="bar-label">${label}</span>
    <div class="bar"><div class="bar-fill" style="width:${width}%"></div></div>
    <span class="bar-used">${field(`resources.${key}`, used)}</span>
    <span class="bar-slack">slack ${field(`slack.${key}`, slack)}</span>
    ${badge}
  </div>`;
  });
  return rows.join('');
}

function perfBlock(point: AnyPoint, previous: AnyPoint | null): string {
  if (!isDesignPoint(point)) {
    return '<p class="perf-none">resource estimate only; run the balancer for throughput</p>';
  }
  const perf = point.performance;
  const prevPerf = previous && isDesignPoint(previous)
    ? previous.performance : null;
  const stages = perf.stages.map((s, i) => `<tr>
    ${cellField(`performance.stages.${i}.layer`, s.layer)}
    ${cellField(`performance.stages.${i}.cycles`, s.cycles, 'num')}
    ${cellField(`performance.stages.${i}.bound`, s.bound)}
  </tr>`).join('');
  return `
  <div class="perf">
    <div class="perf-headline">
      <span class="big">${field('performance.throughput_gops', perf.throughput_gops)} GOp/s</span>
      ${deltaBadge(perf.throughput_gops, prevPerf?.throughput_gops)}
      <span class="big">${field('performance.fps', perf.fps)} fps</span>
      ${deltaBadge(perf.fps, prevPerf?.fps)}
    </div>
    <p>frame ${field('performance.frame_cycles', perf.frame_cycles)} cycles
    at ${field('performance.clock_mhz', perf.clock_mhz)} MHz,
    bottleneck ${field('performance.bottleneck', perf.bottleneck, 'hot')},
    &#177;${field('performance.confidence_band', perf.confidence_band)} band</p>
    <details><summary>per-layer cycles</summary>
    <table class="stages"><thead><tr><th>layer</th><th>cycles</th><th>bound</th></tr></thead>
    <tbody>${stages}</tbody></table></details>
  </div>`;
}

function foldingTable(point: AnyPoint): string {
  const rows = point.folding.map((row, i) => `<tr>
    ${cellField(`folding.${i}.layer`, row.layer)}
    ${cellField(`folding.${i}.p`, row.p, 'num')}
    ${cellField(`folding.${i}.q`, row.q, 'num')}
    ${cellField(`folding.${i}.m`, row.m, 'num')}
  </tr>`).join('');
  const engine = isDesignPoint(point) && point.engine
    ? `<p>shared engine P=${field('engine.p', point.engine.p)}
       Q=${field('engine.q', point.engine.q)}
       M=${field('engine.m', point.engine.m)}</p>`
    : '';
  return `
  <details class="folding"><summary>folding</summary>
  <table><thead><tr><th>layer</th><th>P</th><th>Q</th><th>M</th></tr></thead>
  <tbody>${rows}</tbody></table>${engine}</details>`;
}

export function whatIfPanel(point: AnyPoint, previous: AnyPoint | null): string {
  const feasible = point.feasible;
  const warnings = point.warnings.length
    ? '<ul class="warnings">' + point.warnings.map((w, i) =>
      `<li data-field="warnings.${i}">${esc(w)}</li>`).join('') + '</ul>'
    : '';
  return `
<div class="design-point">
  <div class="point-head">
    ${field('network', point.network, 'name')} on
    ${field('platform', point.platform, 'name')}
    <span class="chip arch">${field('arch', point.arch)}</span>
    <span class="chip ${feasible ? 'ok' : 'bad'}" data-flag="feasible"
      data-value="${feasible}">${feasible ? 'feasible' : 'infeasible'}</span>
  </div>
  <div class="bars">${resourceBars(point, previous)}</div>
  ${perfBlock(point, previous)}
  ${foldingTable(point)}
  ${warnings}
</div>`;
}

export function errorBox(message: string): string {
  return `<div class="error-box">${esc(message)}</div>`;
}

export function passLogView(log: string[]): string {
  if (!log.length) return '';
  return '<pre class="pass-log">' +
    log.map(esc).join('\n') + '</pre>';
}

// ---- pareto scatter ----

const SCATTER_W = 560;
const SCATTER_H = 340;
const MARGIN = { left: 64, right: 16, top: 16, bottom: 44 };

interface Scale {
  (v: number): number;
}

function logScale(values: number[], outLo: number, outHi: number): Scale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!(lo > 0)) lo = 1e-3;
  if (!(hi > 0)) hi = 1;
  let a = Math.log10(lo);
  let b = Math.log10(hi);
  if (b - a < 1e-9) { a -= 0.5; b += 0.5; }
  return v => outLo + ((Math.log10(Math.max(v, 1e-12)) - a) / (b - a)) * (outHi - outLo);
}

export function paretoScatter(sweep: SweepReply, pinned: SweepPoint[]): string {
  const drawable: { point: SweepPoint; index: number }[] = [];
  const failed: { point: SweepPoint; index: number }[] = [];
  sweep.points.forEach((point, index) => {
    if (point.luts !== undefined && point.throughput_gops !== undefined) {
      drawable.push({ point, index });
    } else {
      failed.push({ point, index });
    }
  });
  let svg = '';
  if (drawable.length) {
    const xs = drawable.map(d => parseFloat(d.point.luts as string));
    const ys = drawable.map(d => parseFloat(d.point.throughput_gops as string));
    const x = logScale(xs, MARGIN.left, SCATTER_W - MARGIN.right);
    const y = logScale(ys, SCATTER_H - MARGIN.bottom, MARGIN.top);
    const marks = drawable.map(({ point, index }) => {
      const cx = x(parseFloat(point.luts as string)).toFixed(1);
      const cy = y(parseFloat(point.throughput_gops as string)).toFixed(1);
      const pin = pinned.includes(point) ? ' pinned' : '';
      const front = point.pareto ? ' pareto' : '';
      const label = `${point.platform} ${point.w_bits}/${point.a_bits}`;
      return `<g class="pt${front}${pin}" data-index="${index}" data-pareto="${point.pareto}">
  <circle cx="${cx}" cy="${cy}" r="${point.pareto ? 7 : 5}"></circle>
  <text x="${cx}" y="${(parseFloat(cy) - 10).toFixed(1)}">${esc(label)}</text>
</g>`;
    }).join('\n');
    svg = `<svg viewBox="0 0 ${SCATTER_W} ${SCATTER_H}" class="scatter" role="img">
<text class="axis" x="${SCATTER_W / 2}" y="${SCATTER_H - 8}">LUTs (log)</text>
<text class="axis" transform="rotate(-90)" x="${-SCATTER_H / 2}" y="14">GOp/s (log)</text>
${marks}
</svg>`;
  }
  const errors = failed.map(({ point, index }) =>
    `<li class="sweep-error">${esc(point.platform)} ${esc(point.w_bits)}/${esc(point.a_bits)}
    (${esc(point.arch_request)}): <span data-field="points.${index}.error">${esc(point.error ?? 'no design')}</span></li>`);
  const list = errors.length ? `<ul class="sweep-errors">${errors.join('')}</ul>` : '';
  return `<div class="pareto">${svg}${list}
<p class="hint">frontier points ring-highlighted; click a point to pin it</p></div>`;
}

const PIN_FIELDS: [keyof SweepPoint, string][] = [
  ['platform', 'platform'],
  ['w_bits', 'W'],
  ['a_bits', 'A'],
  ['arch', 'arch'],
  ['luts', 'LUT'],
  ['bram18', 'BRAM18'],
  ['dsps', 'DSP'],
  ['throughput_gops', 'GOp/s'],
  ['fps', 'fps'],
];

export function pinnedPanel(pinned: SweepPoint[]): string {
  if (!pinned.length) return '<p class="hint">no pinned points</p>';
  const head = pinned.map((_, i) => `<th>pin ${i + 1}</th>`).join('');
  const rows = PIN_FIELDS.map(([key, label]) => {
    const cells = pinned.map((point, i) => {
      const value = point[key];
      if (value === undefined) return '<td>&#8212;</td>';
      return cellField(`pinned.${i}.${key}`, String(value), 'num');
    }).join('');
    // per-resource delta between the first two pins, presentation only
    let delta = '';
    if (pinned.length >= 2 && key !== 'platform' && key !== 'arch') {
      delta = `<td class="delta-cell">${deltaBadge(
        pinned[1]?.[key] as Num | undefined,
        pinned[0]?.[key] as Num | undefined)}</td>`;
    } else if (pinned.length >= 2) {
      delta = '<td></td>';
    }
    return `<tr><th>${label}</th>${cells}${delta}</tr>`;
  }).join('');
  const deltaHead = pinned.length >= 2 ? '<th>pin2 &#8722; pin1</th>' : '';
  return `<table class="pins"><thead><tr><th></th>${head}${deltaHead}</tr></thead>
<tbody>${rows}</tbody></table>`;
}

// ---- roofline ----

export function rooflineView(reply: RooflineReply): string {
  const pts = reply.points;
  const xs = pts.map(p => parseFloat(p.intensity_ops_per_byte));
  const ys = pts.flatMap(p => [
    parseFloat(p.attainable_gops),
    parseFloat(p.compute_roof_gops),
    parseFloat(p.memory_roof_gops),
  ]);
  const x = logScale(xs, MARGIN.left, SCATTER_W - MARGIN.right);
  const y = logScale(ys, SCATTER_H - MARGIN.bottom, MARGIN.top);
  const path = (pick: (p: typeof pts[number]) => string) =>
    pts.map((p, i) => `${i ? 'L' : 'M'}${x(parseFloat(p.intensity_ops_per_byte)).toFixed(1)} ${y(parseFloat(pick(p))).toFixed(1)}`).join(' ');
  const rows = pts.map((p, i) => `<tr>
    ${cellField(`points.${i}.intensity_ops_per_byte`, p.intensity_ops_per_byte, 'num')}
    ${cellField(`points.${i}.compute_roof_gops`, p.compute_roof_gops, 'num')}
    ${cellField(`points.${i}.memory_roof_gops`, p.memory_roof_gops, 'num')}
    ${cellField(`points.${i}.attainable_gops`, p.attainable_gops, 'num')}
  </tr>`).join('');
  return `<div class="roofline">
<h3>${field('platform', reply.platform)} at
W=${field('w_bits', reply.w_bits)} A=${field('a_bits', reply.a_bits)}
(${field('clock_mhz', reply.clock_mhz)} MHz)</h3>
<svg viewBox="0 0 ${SCATTER_W} ${SCATTER_H}" class="roof-chart" role="img">
<path class="roof compute" d="${path(p => p.compute_roof_gops)}"></path>
<path class="roof memory" d="${path(p => p.memory_roof_gops)}"></path>
<path class="attainable" d="${path(p => p.attainable_gops)}"></path>
<text class="axis" x="${SCATTER_W / 2}" y="${SCATTER_H - 8}">ops/byte (log)</text>
<text class="axis" transform="rotate(-90)" x="${-SCATTER_H / 2}" y="14">GOp/s (log)</text>
</svg>
<details><summary>points</summary>
<table><thead><tr><th>ops/byte</th><th>compute roof</th><th>memory roof</th><th>attainable</th></tr></thead>
<tbody>${rows}</tbody></table></details>
</div>`;
}
