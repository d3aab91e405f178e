"""Design-space exploration: folding search, scheduling, rooflines, sweeps.

The dataflow balancer starts from an offload candidate, then grows a
fully pipelined design from all-minimal folding: each iteration finds
the stage with the worst work-per-parallelism ratio and advances its
cumulative parallelism to the next divisor of C * C' * N', stopping at
the last folding that still fits the platform. Cumulative parallelism
splits into (P, Q, M) greedily, input channels first, so weight words
stay wide (which is what keeps the weight memory packing sane).
"""

from __future__ import annotations

from dataclasses import dataclass

from .costmodel import (
    DEFAULT_COEFFS,
    DF,
    MO,
    BlockGraph,
    CostCoefficients,
    LayerBlocks,
    PlatformSpec,
    ResourceEstimate,
    accelerator_cost,
    layer_cost,
    mac_lut_cost,
    within_budget,
)
from .errors import EngineTooSmall, IndivisibleFolding
from .ir import Network, Precision
from .passes import lower_to_blocks


def _ceildiv(a: int, b: int) -> int:
    return -(-a // b)


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _factorize(n: int) -> dict[int, int]:
    factors: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def _nu(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def tile_parallelism(m: int, c: int, c_out: int, n_out: int) -> tuple[int, int, int]:
    """Split cumulative parallelism into (P, Q, M), channels first.

    Greedy per prime: as much as C can absorb goes to Q, the remainder
    to P (bounded by C'), the rest to M (bounded by N'). Requires
    m to divide c * c_out * n_out.
    """
    if (c * c_out * n_out) % m:
        raise IndivisibleFolding(
            f"parallelism {m} does not divide {c}*{c_out}*{n_out}")
    p = q = mm = 1
    for prime, e in _factorize(m).items():
        eq = min(e, _nu(c, prime))
        ep = min(e - eq, _nu(c_out, prime))
        em = e - eq - ep
        if em > _nu(n_out, prime):
            raise IndivisibleFolding(
                f"parallelism {m} does not tile ({c}, {c_out}, {n_out})")
        q *= prime ** eq
        p *= prime ** ep
        mm *= prime ** em
    return p, q, mm


FoldingConfig = dict[str, tuple[int, int, int]]


def all_ones_folding(blocks: BlockGraph) -> FoldingConfig:
    return {s.layer: (1, 1, 1) for s in blocks.stages
            if s.kind in ("conv", "fc")}


def _stage_folding(stage: LayerBlocks, folding: FoldingConfig) -> tuple[int, int, int]:
    if stage.kind == "pool":
        return (1, 1, 1)
    return folding[stage.layer]


def design_resources(blocks: BlockGraph, folding: FoldingConfig,
                     platform: PlatformSpec,
                     coeffs: CostCoefficients = DEFAULT_COEFFS) -> ResourceEstimate:
    costs = [layer_cost(s, _stage_folding(s, folding), blocks.arch,
                        platform, coeffs)
             for s in blocks.stages]
    return accelerator_cost(costs, blocks.arch, platform, coeffs)


def feasible(net: Network, folding: FoldingConfig, platform: PlatformSpec,
             arch: str = DF,
             coeffs: CostCoefficients = DEFAULT_COEFFS) -> tuple[bool, dict]:
    blocks = lower_to_blocks(net, arch)
    total = design_resources(blocks, folding, platform, coeffs)
    return within_budget(total, platform)


# ---- performance ----

@dataclass(frozen=True)
class StagePerf:
    layer: str
    cycles: float
    bound: str          # MVU | SWU | MP | compute | memory

    def to_payload(self) -> dict:
        return {"layer": self.layer, "cycles": self.cycles, "bound": self.bound}


@dataclass(frozen=True)
class PerfEstimate:
    mode: str                      # df | mo
    frame_cycles: float
    fps: float
    throughput_gops: float
    bottleneck: str
    total_macs: int
    clock_mhz: float
    stages: tuple[StagePerf, ...]
    confidence_band: float = 0.30

    def to_payload(self) -> dict:
        return {
            "mode": self.mode,
            "frame_cycles": self.frame_cycles,
            "fps": self.fps,
            "throughput_gops": self.throughput_gops,
            "bottleneck": self.bottleneck,
            "total_macs": self.total_macs,
            "total_ops": 2 * self.total_macs,
            "clock_mhz": self.clock_mhz,
            "confidence_band": self.confidence_band,
            "stages": [s.to_payload() for s in self.stages],
        }


def _df_stage_cycles(stage: LayerBlocks,
                     folding: tuple[int, int, int]) -> tuple[int, str]:
    p, q, m = folding
    if stage.kind == "pool":
        swu = stage.k * stage.k * stage.out_pixels * stage.in_channels
        mp = stage.out_pixels * stage.in_channels
        return (swu, "SWU") if swu >= mp else (mp, "MP")
    mvu = _ceildiv(stage.macs, p * q * m)
    if stage.kind == "conv":
        swu = _ceildiv(stage.k * stage.k * stage.out_pixels
                       * _ceildiv(stage.in_channels, q), m)
        if swu > mvu:
            return swu, "SWU"
    return mvu, "MVU"


def estimate_performance(blocks: BlockGraph, folding: FoldingConfig,
                         platform: PlatformSpec,
                         coeffs: CostCoefficients = DEFAULT_COEFFS) -> PerfEstimate:
    """Pipelined (dataflow) rate: every stage runs concurrently, the
    frame interval is the slowest stage."""
    stages = []
    worst: tuple[float, str] = (0.0, "")
    for s in blocks.stages:
        cycles, bound = _df_stage_cycles(s, _stage_folding(s, folding))
        stages.append(StagePerf(s.layer, cycles, bound))
        if cycles > worst[0]:
            worst = (cycles, s.layer)
    frame = worst[0] if stages else 1.0
    fps = platform.clock_hz() / frame
    total_macs = sum(s.macs for s in blocks.stages)
    return PerfEstimate(
        mode=DF, frame_cycles=frame, fps=fps,
        throughput_gops=2 * total_macs * fps / 1e9,
        bottleneck=worst[1], total_macs=total_macs,
        clock_mhz=platform.clock_mhz, stages=tuple(stages),
        confidence_band=coeffs.confidence_band)


# ---- multilayer offload ----

@dataclass(frozen=True)
class ScheduleEntry:
    layer: str
    compute_cycles: float
    weight_transfer_cycles: float
    fm_transfer_cycles: float
    time_cycles: float
    bound: str

    def to_payload(self) -> dict:
        return {
            "layer": self.layer,
            "compute_cycles": self.compute_cycles,
            "weight_transfer_cycles": self.weight_transfer_cycles,
            "fm_transfer_cycles": self.fm_transfer_cycles,
            "time_cycles": self.time_cycles,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class Schedule:
    engine: tuple[int, int, int]
    entries: tuple[ScheduleEntry, ...]
    frame_cycles: float
    compute_utilization: float

    def to_payload(self) -> dict:
        return {
            "engine": {"p": self.engine[0], "q": self.engine[1],
                       "m": self.engine[2]},
            "frame_cycles": self.frame_cycles,
            "compute_utilization": self.compute_utilization,
            "entries": [e.to_payload() for e in self.entries],
        }


def _largest_divisor_not_above(n: int, cap: int) -> int:
    best = 1
    for d in divisors(n):
        if d <= cap:
            best = d
        else:
            break
    return best


def clamp_engine(stage: LayerBlocks,
                 engine: tuple[int, int, int]) -> tuple[int, int, int]:
    """Effective folding of one layer on a shared engine: largest
    divisors of the layer's dimensions not exceeding the engine's."""
    p, q, m = engine
    p_eff = _largest_divisor_not_above(stage.out_channels, p)
    q_eff = _largest_divisor_not_above(stage.in_channels, q)
    m_eff = 1 if stage.kind == "fc" else _largest_divisor_not_above(stage.out_width, m)
    return p_eff, q_eff, m_eff


def schedule_multilayer_offload(
    net: Network, engine: tuple[int, int, int], platform: PlatformSpec,
    coeffs: CostCoefficients = DEFAULT_COEFFS,
    blocks: BlockGraph | None = None,
) -> tuple[Schedule, PerfEstimate]:
    """Serialize the graph on one shared engine, layer by layer.

    Weights stream from DRAM each frame; a layer's wall time is the
    larger of its compute time and its transfer time (weights plus
    in/out feature maps share the link).
    """
    if blocks is None:
        blocks = lower_to_blocks(net, MO)
    return _schedule_blocks(blocks, engine, platform, coeffs)


def _schedule_blocks(blocks: BlockGraph, engine: tuple[int, int, int],
                     platform: PlatformSpec,
                     coeffs: CostCoefficients) -> tuple[Schedule, PerfEstimate]:
    p, q, m = engine
    if p < 1 or q < 1 or m < 1:
        raise EngineTooSmall(f"engine geometry {engine} is not buildable")
    bytes_per_cycle = platform.dram_gbytes_per_s * 1e9 / platform.clock_hz()

    entries = []
    total_compute = 0.0
    frame = 0.0
    worst: tuple[float, str] = (0.0, "")
    for s in blocks.stages:
        p_eff, q_eff, m_eff = clamp_engine(s, engine)
        compute = _ceildiv(s.macs, p_eff * q_eff * m_eff) if s.macs else 0
        w_bits = s.weight_count * s.weights.bits if s.weights else 0
        wt = (w_bits / 8) / bytes_per_cycle
        fm_bits = s.in_elements * s.a_in.bits + s.out_pixels * s.out_channels * s.out_elem_bits
        fmt = (fm_bits / 8) / bytes_per_cycle
        time = max(float(compute), wt + fmt)
        bound = "compute" if compute >= wt + fmt else "memory"
        entries.append(ScheduleEntry(s.layer, float(compute), wt, fmt, time, bound))
        total_compute += compute
        frame += time
        if time > worst[0]:
            worst = (time, s.layer)

    frame = frame or 1.0
    fps = platform.clock_hz() / frame
    total_macs = sum(s.macs for s in blocks.stages)
    sched = Schedule(engine, tuple(entries), frame,
                     total_compute / frame)
    perf = PerfEstimate(
        mode=MO, frame_cycles=frame, fps=fps,
        throughput_gops=2 * total_macs * fps / 1e9,
        bottleneck=worst[1], total_macs=total_macs,
        clock_mhz=platform.clock_mhz,
        stages=tuple(StagePerf(e.layer, e.time_cycles, e.bound)
                     for e in entries),
        confidence_band=coeffs.confidence_band)
    return sched, perf


def choose_mo_engine(blocks: BlockGraph, platform: PlatformSpec,
                     coeffs: CostCoefficients = DEFAULT_COEFFS) -> tuple[int, int, int]:
    """Pick the shared-engine geometry with the fastest predicted frame.

    Exhaustive over power-of-two (P, Q) up to the widest layer; the cost
    of an engine is not monotone in its size (narrow weight words
    fragment BRAM), so hill climbing gets trapped and a sweep is cheap
    enough. M stays 1: output pixels on a shared engine serialize.
    """
    def mo_fits(engine):
        costs = [layer_cost(s, clamp_engine(s, engine), MO, platform, coeffs)
                 for s in blocks.stages]
        total = accelerator_cost(costs, MO, platform, coeffs)
        return within_budget(total, platform)[0]

    compute = [s for s in blocks.stages if s.kind in ("conv", "fc")]
    if not compute:
        return (1, 1, 1)
    q_cap = max(s.in_channels for s in compute)
    p_cap = max(s.out_channels for s in compute)
    best = (1, 1, 1)
    best_key = None
    q = 1
    while q <= q_cap:
        p = 1
        while p <= p_cap:
            engine = (p, q, 1)
            if mo_fits(engine):
                _, perf = _schedule_blocks(blocks, engine, platform, coeffs)
                # fastest frame, then the smaller and wider engine
                key = (-perf.fps, p * q, -q)
                if best_key is None or key < best_key:
                    best, best_key = engine, key
            p *= 2
        q *= 2
    return best


# ---- the balancing loop ----

@dataclass(frozen=True)
class BalanceStep:
    parallelism: dict[str, int]
    max_ratio: float
    throughput_gops: float

    def to_payload(self) -> dict:
        return {"parallelism": dict(self.parallelism),
                "max_ratio": self.max_ratio,
                "throughput_gops": self.throughput_gops}


@dataclass(frozen=True)
class AcceleratorDesign:
    network: str
    platform: str
    arch: str
    folding: FoldingConfig
    resources: ResourceEstimate
    slack: dict[str, float]
    is_feasible: bool
    perf: PerfEstimate
    engine: tuple[int, int, int] | None = None
    schedule: Schedule | None = None
    trace: tuple[BalanceStep, ...] = ()
    warnings: tuple[str, ...] = ()

    def to_payload(self) -> dict:
        payload = {
            "network": self.network,
            "platform": self.platform,
            "arch": self.arch,
            "folding": [
                {"layer": layer, "p": pqm[0], "q": pqm[1], "m": pqm[2]}
                for layer, pqm in self.folding.items()
            ],
            "resources": self.resources.to_payload(),
            "slack": self.slack,
            "feasible": self.is_feasible,
            "performance": self.perf.to_payload(),
            "warnings": list(self.warnings),
        }
        if self.engine is not None:
            payload["engine"] = {"p": self.engine[0], "q": self.engine[1],
                                 "m": self.engine[2]}
        if self.schedule is not None:
            payload["schedule"] = self.schedule.to_payload()
        if self.trace:
            payload["trace"] = [t.to_payload() for t in self.trace]
        return payload


def _folding_from_parallelism(blocks: BlockGraph,
                              m_vec: dict[str, int]) -> FoldingConfig:
    folding = {}
    for s in blocks.stages:
        if s.kind not in ("conv", "fc"):
            continue
        folding[s.layer] = tile_parallelism(
            m_vec[s.layer], s.in_channels, s.out_channels, s.out_width)
    return folding


def balance_dataflow(net: Network, platform: PlatformSpec,
                     coeffs: CostCoefficients = DEFAULT_COEFFS) -> AcceleratorDesign:
    """Work-balanced folding search; falls back to offload when even the
    all-minimal pipeline does not fit."""
    blocks = lower_to_blocks(net, DF)
    compute = [s for s in blocks.stages if s.kind in ("conv", "fc")]
    caps = {s.layer: s.in_channels * s.out_channels * s.out_width for s in compute}
    work = {s.layer: s.macs for s in compute}
    m_vec = {s.layer: 1 for s in compute}
    order = [s.layer for s in compute]

    best = None
    trace: list[BalanceStep] = []
    while True:
        folding = _folding_from_parallelism(blocks, m_vec)
        total = design_resources(blocks, folding, platform, coeffs)
        ok, slack = within_budget(total, platform)
        if not ok:
            break
        perf = estimate_performance(blocks, folding, platform, coeffs)
        open_ratios = {l: work[l] / m_vec[l] for l in order if m_vec[l] < caps[l]}
        trace.append(BalanceStep(
            dict(m_vec),
            max((work[l] / m_vec[l] for l in order), default=0.0),
            perf.throughput_gops))
        best = AcceleratorDesign(
            network=net.name, platform=platform.name, arch=DF,
            folding=folding, resources=total, slack=slack, is_feasible=True,
            perf=perf, trace=tuple(trace), warnings=blocks.warnings)
        if not open_ratios:
            break
        peak = max(open_ratios.values())
        target = next(l for l in order if open_ratios.get(l) == peak)
        nxt = next(d for d in divisors(caps[target]) if d > m_vec[target])
        m_vec[target] = nxt

    if best is not None:
        return best

    mo_blocks = lower_to_blocks(net, MO)
    engine = choose_mo_engine(mo_blocks, platform, coeffs)
    sched, perf = schedule_multilayer_offload(net, engine, platform, coeffs,
                                              blocks=mo_blocks)
    folding = {s.layer: clamp_engine(s, engine)
               for s in mo_blocks.stages if s.kind in ("conv", "fc")}
    total = design_resources(mo_blocks, folding, platform, coeffs)
    ok, slack = within_budget(total, platform)
    return AcceleratorDesign(
        network=net.name, platform=platform.name, arch=MO,
        folding=folding, resources=total, slack=slack, is_feasible=ok,
        perf=perf, engine=engine, schedule=sched, warnings=mo_blocks.warnings)


# ---- rooflines ----

@dataclass(frozen=True)
class RooflinePoint:
    intensity_ops_per_byte: float
    compute_roof_gops: float
    memory_roof_gops: float
    attainable_gops: float

    def to_payload(self) -> dict:
        return {
            "intensity_ops_per_byte": self.intensity_ops_per_byte,
            "compute_roof_gops": self.compute_roof_gops,
            "memory_roof_gops": self.memory_roof_gops,
            "attainable_gops": self.attainable_gops,
        }


def roofline(platform: PlatformSpec, weights: Precision, activations: Precision,
             intensities: list[float],
             coeffs: CostCoefficients = DEFAULT_COEFFS,
             clock_mhz: float | None = None) -> list[RooflinePoint]:
    """LUT-budget compute roof against the DRAM bandwidth roof.

    The compute roof counts how many single-element MACs the usable LUT
    budget buys at the given precisions (HLS cost model), times two ops
    each, times the clock.
    """
    clock_hz = (clock_mhz or platform.clock_mhz) * 1e6
    per_mac = mac_lut_cost(1, weights, activations, impl="hls", coeffs=coeffs)
    parallel_macs = platform.luts_total * platform.lut_ceiling / per_mac
    compute_roof = 2 * parallel_macs * clock_hz / 1e9
    points = []
    for i in intensities:
        mem_roof = platform.dram_gbytes_per_s * i
        points.append(RooflinePoint(
            intensity_ops_per_byte=i,
            compute_roof_gops=compute_roof,
            memory_roof_gops=mem_roof,
            attainable_gops=min(compute_roof, mem_roof)))
    return points


# ---- precision / platform sweeps ----

@dataclass(frozen=True)
class SweepPoint:
    platform: str
    w_bits: int
    a_bits: int
    arch_request: str
    design: AcceleratorDesign | None
    error: str | None = None
    pareto: bool = False

    def to_payload(self) -> dict:
        payload = {
            "platform": self.platform,
            "w_bits": self.w_bits,
            "a_bits": self.a_bits,
            "arch_request": self.arch_request,
            "pareto": self.pareto,
        }
        if self.error is not None:
            payload["error"] = self.error
        if self.design is not None:
            payload["arch"] = self.design.arch
            payload["feasible"] = self.design.is_feasible
            payload["luts"] = self.design.resources.luts
            payload["bram18"] = self.design.resources.bram18
            payload["dsps"] = self.design.resources.dsps
            payload["throughput_gops"] = self.design.perf.throughput_gops
            payload["fps"] = self.design.perf.fps
        return payload


def pareto_flags(points: list[tuple[float, float]]) -> list[bool]:
    """Non-dominated set for (cost to minimize, value to maximize)."""
    flags = []
    for i, (ci, vi) in enumerate(points):
        dominated = False
        for j, (cj, vj) in enumerate(points):
            if j == i:
                continue
            if cj <= ci and vj >= vi and (cj < ci or vj > vi):
                dominated = True
                break
        flags.append(not dominated)
    return flags


def sweep(net: Network, platforms: list[PlatformSpec],
          pairs: list[tuple[int, int]], archs: list[str],
          coeffs: CostCoefficients = DEFAULT_COEFFS) -> list[SweepPoint]:
    """Cross product of platform x precision pair x architecture request."""
    from .passes import set_precision

    points: list[SweepPoint] = []
    for platform in platforms:
        for w_bits, a_bits in pairs:
            tagged = set_precision(net, w_bits=w_bits, a_bits=a_bits)
            for arch in archs:
                try:
                    design = _sweep_design(tagged, platform, arch, coeffs)
                    err = None
                    if arch == DF and design.arch != DF:
                        design, err = None, "dataflow does not fit, offload required"
                except IndivisibleFolding as exc:
                    design, err = None, str(exc)
                points.append(SweepPoint(platform.name, w_bits, a_bits, arch,
                                         design, err))

    eligible = [
        (i, (p.design.resources.luts, p.design.perf.throughput_gops))
        for i, p in enumerate(points)
        if p.design is not None and p.design.is_feasible
    ]
    flags = pareto_flags([xy for _, xy in eligible])
    flagged = {i for (i, _), f in zip(eligible, flags) if f}
    return [
        SweepPoint(p.platform, p.w_bits, p.a_bits, p.arch_request,
                   p.design, p.error, pareto=(i in flagged))
        for i, p in enumerate(points)
    ]


def _sweep_design(net: Network, platform: PlatformSpec, arch: str,
                  coeffs: CostCoefficients) -> AcceleratorDesign:
    if arch in (DF, "auto"):
        return balance_dataflow(net, platform, coeffs)
    if arch == MO:
        blocks = lower_to_blocks(net, MO)
        engine = choose_mo_engine(blocks, platform, coeffs)
        sched, perf = schedule_multilayer_offload(net, engine, platform,
                                                  coeffs, blocks=blocks)
        folding = {s.layer: clamp_engine(s, engine)
                   for s in blocks.stages if s.kind in ("conv", "fc")}
        total = design_resources(blocks, folding, platform, coeffs)
        ok, slack = within_budget(total, platform)
        return AcceleratorDesign(
            network=net.name, platform=platform.name, arch=MO,
            folding=folding, resources=total, slack=slack, is_feasible=ok,
            perf=perf, engine=engine, schedule=sched, warnings=blocks.warnings)
    raise ValueError(f"unknown architecture request {arch!r}")
