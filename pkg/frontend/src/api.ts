// Typed client for the estimation service. The service serializes every
// number as a decimal string; they stay strings here so the page shows the
// service's bytes, not a reformatted float.

export type Num = string;

export interface UploadReply {
  session: string;
  name: string;
  layer_count: Num;
}

export interface LayerRow {
  layer: string;
  macs: Num;
  ops: Num;
  w_bits: Num;
  a_bits: Num;
  weight_count: Num;
  weight_mem_bits: Num;
  activation_mem_bits: Num;
}

export interface WorkloadReport {
  network: string;
  layers: LayerRow[];
  total_ops: Num;
  total_params: Num;
  ops_by_precision: Record<string, Num>;
}

export interface PassesReply {
  passes: string[];
  log: string[];
  topology: unknown;
  snapshot: string | null;
}

export interface Resources {
  luts: Num;
  bram18: Num;
  dsps: Num;
}

export interface FoldingRow {
  layer: string;
  p: Num;
  q: Num;
  m: Num;
}

export interface StageRow {
  layer: string;
  cycles: Num;
  bound: string;
}

export interface Performance {
  fps: Num;
  throughput_gops: Num;
  frame_cycles: Num;
  bottleneck: string;
  clock_mhz: Num;
  confidence_band: Num;
  mode: string;
  total_macs: Num;
  total_ops: Num;
  stages: StageRow[];
}

// POST /balance reply: a searched design with performance attached.
export interface DesignPoint {
  network: string;
  platform: string;
  arch: string;
  feasible: boolean;
  folding: FoldingRow[];
  resources: Resources;
  slack: Resources;
  performance: Performance;
  warnings: string[];
  engine?: { p: Num; q: Num; m: Num };
  schedule?: unknown;
  trace?: unknown[];
}

// POST /estimate reply: resources only, no performance block.
export interface EstimateReply {
  network: string;
  platform: string;
  arch: string;
  feasible: boolean;
  folding: FoldingRow[];
  resources: Resources;
  budget: Resources;
  slack: Resources;
  warnings: string[];
}

export type AnyPoint = DesignPoint | EstimateReply;

export interface SweepPoint {
  platform: string;
  w_bits: Num;
  a_bits: Num;
  arch_request: string;
  pareto: boolean;
  error?: string;
  arch?: string;
  feasible?: boolean;
  luts?: Num;
  bram18?: Num;
  dsps?: Num;
  throughput_gops?: Num;
  fps?: Num;
}

export interface SweepReply {
  network: string;
  points: SweepPoint[];
}

export interface PlatformEntry {
  name: string;
  luts_total: Num;
  bram18_total: Num;
  dsp_total: Num;
  lut_ceiling: Num;
  bram_ceiling: Num;
  dsp_ceiling: Num;
  clock_mhz: Num;
  dram_gbytes_per_s: Num;
  shell: { luts: Num; bram18: Num; dsps: Num };
}

export interface RooflinePoint {
  intensity_ops_per_byte: Num;
  compute_roof_gops: Num;
  memory_roof_gops: Num;
  attainable_gops: Num;
}

export interface RooflineReply {
  platform: string;
  w_bits: Num;
  a_bits: Num;
  clock_mhz: Num;
  points: RooflinePoint[];
}

export interface ErrorPayload {
  error: string;
  detail?: unknown;
}

export class ServiceError extends Error {
  constructor(readonly status: number, readonly payload: ErrorPayload) {
    super(payload.detail !== undefined
      ? `${payload.error}: ${String(payload.detail)}`
      : payload.error);
    this.name = 'ServiceError';
  }
}

// What the store needs from the network; ServiceClient is the real thing,
// tests substitute canned replies.
export interface EstimationApi {
  upload(topology: string, fmt?: string): Promise<UploadReply>;
  report(session: string, passes?: string[]): Promise<WorkloadReport>;
  runPasses(session: string, passes: string[]): Promise<PassesReply>;
  balance(session: string, platform: string, passes: string[]): Promise<DesignPoint>;
  estimate(session: string, platform: string, arch: 'df' | 'mo',
    passes: string[], folding?: FoldingRow[]): Promise<EstimateReply>;
  platforms(): Promise<{ platforms: PlatformEntry[] }>;
  roofline(platform: string, wBits: number, aBits: number): Promise<RooflineReply>;
  sweep(session: string, platforms: string[], pairs: [number, number][],
    archs: string[], passes: string[]): Promise<SweepReply>;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient implements EstimationApi {
  constructor(
    private base = '',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      const text = await res.text();
      let payload: ErrorPayload = { error: text || res.statusText };
      try {
        const doc = JSON.parse(text);
        if (doc && typeof doc.error === 'string') payload = doc;
      } catch {
        // non-JSON body, keep the text
      }
      throw new ServiceError(res.status, payload);
    }
    return res.json() as Promise<T>;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  upload(topology: string, fmt?: string): Promise<UploadReply> {
    return this.post('/networks', fmt ? { topology, fmt } : { topology });
  }

  report(session: string, passes?: string[]): Promise<WorkloadReport> {
    const query = passes && passes.length
      ? `?passes=${encodeURIComponent(passes.join(','))}`
      : '';
    return this.request(`/networks/${session}/report${query}`);
  }

  runPasses(session: string, passes: string[]): Promise<PassesReply> {
    return this.post(`/networks/${session}/passes`, { passes });
  }

  balance(session: string, platform: string, passes: string[]): Promise<DesignPoint> {
    return this.post('/balance', { session, platform, passes });
  }

  estimate(session: string, platform: string, arch: 'df' | 'mo',
      passes: string[], folding?: FoldingRow[]): Promise<EstimateReply> {
    const body: Record<string, unknown> = { session, platform, arch, passes };
    if (folding) body.folding = folding;
    return this.post('/estimate', body);
  }

  platforms(): Promise<{ platforms: PlatformEntry[] }> {
    return this.request('/platforms');
  }

  roofline(platform: string, wBits: number, aBits: number): Promise<RooflineReply> {
    return this.post('/roofline', { platform, w_bits: wBits, a_bits: aBits });
  }

  sweep(session: string, platforms: string[], pairs: [number, number][],
      archs: string[], passes: string[]): Promise<SweepReply> {
    return this.post('/sweep', { session, platforms, pairs, archs, passes });
  }
}
