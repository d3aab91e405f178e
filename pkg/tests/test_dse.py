import numpy as np
import pytest

from quantforge.costmodel import (
    DEFAULT_COEFFS,
    PlatformSpec,
    ResourceEstimate,
    get_platform,
    mac_lut_cost,
)
from quantforge.dse import (
    AcceleratorDesign,
    balance_dataflow,
    choose_mo_engine,
    clamp_engine,
    divisors,
    estimate_performance,
    feasible,
    pareto_flags,
    roofline,
    schedule_multilayer_offload,
    sweep,
    tile_parallelism,
)
from quantforge.errors import EngineTooSmall, IndivisibleFolding
from quantforge.ir import (
    Convolution,
    FullyConnected,
    InputLayer,
    MaxPool,
    Precision,
    Quantize,
    TensorShape,
    chain,
)
from quantforge.passes import lower_to_blocks, reorder_maxpool, streamline

PYNQ = get_platform("pynq-z1")
F1 = get_platform("aws-f1")


def test_divisors():
    assert divisors(1) == [1]
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    for n in range(1, 200):
        assert divisors(n) == [d for d in range(1, n + 1) if n % d == 0]


def test_tile_parallelism_worked_values():
    assert tile_parallelism(8, 4, 4, 4) == (2, 4, 1)
    assert tile_parallelism(6, 4, 9, 1) == (3, 2, 1)


def test_tile_parallelism_exhaustive_small():
    for c in range(1, 13):
        for c_out in range(1, 13):
            for n_out in range(1, 13):
                total = c * c_out * n_out
                for m in divisors(total):
                    p, q, mm = tile_parallelism(m, c, c_out, n_out)
                    assert p * q * mm == m
                    assert c % q == 0
                    assert c_out % p == 0
                    assert n_out % mm == 0


def test_tile_parallelism_rejects_indivisible():
    with pytest.raises(IndivisibleFolding):
        tile_parallelism(5, 4, 4, 4)
    assert tile_parallelism(7, 7, 1, 1) == (1, 7, 1)


# one 64->64 3x3 layer on a 12x12 input, MVU work 3.6864 M MACs
def mvu_toy():
    return chain("one", [
        InputLayer("input", TensorShape(64, 12, 12), Precision.uint(1)),
        Convolution("c0", k=3, out_channels=64, weights=Precision.binary()),
        Quantize("q0", out_precision=Precision.binary()),
    ])


def test_estimate_performance_worked_value():
    blocks = lower_to_blocks(mvu_toy(), "df")
    perf = estimate_performance(blocks, {"c0": (8, 8, 1)}, PYNQ)
    assert perf.frame_cycles == 57600
    assert perf.fps == pytest.approx(100e6 / 57600)
    assert perf.throughput_gops == pytest.approx(12.8)
    assert perf.bottleneck == "c0"
    assert perf.stages[0].bound == "MVU"

    double_p = estimate_performance(blocks, {"c0": (16, 8, 1)}, PYNQ)
    assert double_p.frame_cycles == 28800


def test_estimate_performance_swu_bound():
    net = chain("wide", [
        InputLayer("input", TensorShape(3, 12, 12), Precision.uint(1)),
        Convolution("c0", k=3, out_channels=64, weights=Precision.binary()),
        Quantize("q0", out_precision=Precision.binary()),
    ])
    blocks = lower_to_blocks(net, "df")
    # fully parallel dot products, but the window buffer reads two
    # channel groups per pixel: generation outpaces compute
    perf = estimate_performance(blocks, {"c0": (64, 2, 1)}, PYNQ)
    assert perf.stages[0].bound == "SWU"
    assert perf.frame_cycles == 1800


def test_estimate_performance_pool_stage(cnv6):
    slim = reorder_maxpool(streamline(cnv6))
    blocks = lower_to_blocks(slim, "df")
    folding = {s.layer: (1, 1, 1) for s in blocks.stages
               if s.kind in ("conv", "fc")}
    perf = estimate_performance(blocks, folding, PYNQ)
    by_layer = {s.layer: s for s in perf.stages}
    pool = blocks.stage("pool0")
    assert by_layer["pool0"].cycles == 4 * pool.out_pixels * pool.in_channels
    assert by_layer["pool0"].bound == "SWU"
    assert perf.frame_cycles == max(s.cycles for s in perf.stages)


# ---- shared-engine schedule ----

TOY_PLATFORM = PlatformSpec("toy", 10**6, 10**5, 0, clock_mhz=100.0,
                            dram_gbytes_per_s=1.0)


def test_schedule_weight_transfer_worked_value():
    net = chain("big-fc", [
        InputLayer("input", TensorShape(4000, 1, 1), Precision.uint(8)),
        FullyConnected("fc0", out_size=2000, weights=Precision.binary()),
        Quantize("q0", out_precision=Precision.binary()),
    ])
    sched, perf = schedule_multilayer_offload(net, (1, 1, 1), TOY_PLATFORM)
    entry = sched.entries[0]
    # 8 Mbit of weights over a 10 byte/cycle link
    assert entry.weight_transfer_cycles == pytest.approx(100000.0)
    assert entry.fm_transfer_cycles == pytest.approx((4000 * 8 + 2000) / 8 / 10)
    assert entry.bound == "compute"            # 8.4 M MACs dwarf the transfer
    assert sched.compute_utilization == pytest.approx(1.0)
    assert perf.mode == "mo"


def test_schedule_weightless_layer_is_transfer_bound():
    net = chain("pool-only", [
        InputLayer("input", TensorShape(8, 8, 8), Precision.uint(2)),
        MaxPool("p0", k=2, s=2),
    ])
    sched, _ = schedule_multilayer_offload(net, (4, 4, 1), TOY_PLATFORM)
    entry = sched.entries[0]
    assert entry.compute_cycles == 0
    assert entry.weight_transfer_cycles == 0
    assert entry.fm_transfer_cycles > 0
    assert entry.bound == "memory"


def test_schedule_frame_is_sum_of_layers(cnv6):
    slim = reorder_maxpool(streamline(cnv6))
    sched, perf = schedule_multilayer_offload(slim, (16, 16, 1), PYNQ)
    assert perf.frame_cycles == pytest.approx(
        sum(e.time_cycles for e in sched.entries))
    assert 0 < sched.compute_utilization <= 1.0


def test_schedule_rejects_degenerate_engine(cnv6):
    slim = reorder_maxpool(streamline(cnv6))
    with pytest.raises(EngineTooSmall):
        schedule_multilayer_offload(slim, (0, 1, 1), PYNQ)


def test_clamp_engine(cnv6):
    slim = reorder_maxpool(streamline(cnv6))
    blocks = lower_to_blocks(slim, "mo")
    conv = blocks.stage("conv1")               # 64 in, 64 out, 28 wide
    assert clamp_engine(conv, (48, 48, 4)) == (32, 32, 4)
    assert clamp_engine(conv, (256, 256, 256)) == (64, 64, 28)
    fc = blocks.stage("fc0")
    assert clamp_engine(fc, (8, 8, 8))[2] == 1


def test_offload_never_beats_pipeline_at_same_folding(cnv6):
    slim = reorder_maxpool(streamline(cnv6))
    blocks = lower_to_blocks(slim, "df")
    folding = {s.layer: (1, 1, 1) for s in blocks.stages
               if s.kind in ("conv", "fc")}
    df = estimate_performance(blocks, folding, PYNQ)
    _, mo = schedule_multilayer_offload(slim, (1, 1, 1), PYNQ)
    assert mo.frame_cycles >= df.frame_cycles


# ---- balancing ----

def df_toy():
    return chain("toy", [
        InputLayer("input", TensorShape(4, 8, 8), Precision.uint(8)),
        Convolution("c0", k=3, out_channels=8, weights=Precision.binary()),
        Quantize("q0", out_precision=Precision.uint(2)),
        FullyConnected("fc0", out_size=10, weights=Precision.binary()),
    ])


def test_balance_saturates_small_net():
    design = balance_dataflow(df_toy(), PYNQ)
    assert design.arch == "df"
    assert design.is_feasible
    assert design.folding["c0"] == (8, 4, 6)   # fully parallel
    assert design.folding["fc0"] == (10, 288, 1)
    ratios = [s.max_ratio for s in design.trace]
    gops = [s.throughput_gops for s in design.trace]
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))
    assert all(a <= b for a, b in zip(gops, gops[1:]))


def test_balance_trace_starts_all_ones():
    design = balance_dataflow(df_toy(), PYNQ)
    first = design.trace[0].parallelism
    assert set(first.values()) == {1}


def test_balance_folding_divides_dimensions():
    design = balance_dataflow(df_toy(), PYNQ)
    blocks = lower_to_blocks(df_toy(), "df")
    for layer, (p, q, m) in design.folding.items():
        s = blocks.stage(layer)
        assert s.out_channels % p == 0
        assert s.in_channels % q == 0
        assert s.out_width % m == 0


def test_balance_falls_back_to_offload():
    starved = PlatformSpec("starved", 5000, 11, 0, clock_mhz=100.0,
                           dram_gbytes_per_s=1.0)
    design = balance_dataflow(df_toy(), starved)
    assert design.arch == "mo"
    assert design.engine is not None
    assert design.schedule is not None


def test_balance_randomized_toys():
    rng = np.random.default_rng(29)
    dims = [2, 3, 4, 6, 8, 12, 16]
    for trial in range(20):
        c = int(rng.choice(dims))
        size = int(rng.choice([6, 8, 12]))
        width = int(rng.choice([1, 2]))
        layers = [InputLayer("input", TensorShape(c, size, size),
                             Precision.uint(int(rng.integers(1, 5))))]
        n_conv = int(rng.integers(1, 3))
        ch = c
        for i in range(n_conv):
            out = int(rng.choice(dims))
            layers.append(Convolution(f"c{i}", k=3, pad=1, out_channels=out,
                                      weights=Precision.binary() if width == 1
                                      else Precision.sint(2)))
            layers.append(Quantize(f"q{i}", out_precision=Precision.uint(2)))
            ch = out
        layers.append(FullyConnected("fc", out_size=int(rng.choice(dims)),
                            weights=Precision.binary()))
        net = chain(f"toy{trial}", layers)

        luts = int(rng.choice([4000, 20000, 100000]))
        bram = int(rng.choice([12, 60, 400]))
        plat = PlatformSpec(f"p{trial}", luts, bram, 0, clock_mhz=100.0,
                            dram_gbytes_per_s=2.0)
        design = balance_dataflow(net, plat)
        if design.arch == "df":
            assert design.is_feasible
            ratios = [s.max_ratio for s in design.trace]
            gops = [s.throughput_gops for s in design.trace]
            assert all(a >= b for a, b in zip(ratios, ratios[1:]))
            assert all(a <= b for a, b in zip(gops, gops[1:]))
        else:
            assert design.engine is not None


def test_engine_search_escapes_bram_fragmentation(cnv6):
    # at (1,1,1) the big dense layer needs 512 blocks of weight memory,
    # over budget; wider engines pack the same bits into fewer blocks
    slim = reorder_maxpool(streamline(cnv6))
    design = balance_dataflow(slim, PYNQ)
    assert design.arch == "mo"
    assert design.is_feasible
    assert design.engine == (64, 64, 1)
    assert design.perf.throughput_gops > 341 / 2


def test_feasible_helper(cnv6):
    slim = reorder_maxpool(streamline(cnv6))
    blocks = lower_to_blocks(slim, "df")
    folding = {s.layer: (1, 1, 1) for s in blocks.stages
               if s.kind in ("conv", "fc")}
    ok, slack = feasible(slim, folding, PYNQ)
    assert not ok
    assert slack["bram18"] < 0                 # weight memory fragmentation


# ---- roofline ----

def test_roofline_precision_ordering():
    ladder = [2.0 ** e for e in range(-3, 8)]
    roofs = {}
    for w, a in [(1, 1), (2, 2), (8, 8)]:
        wp = Precision.binary() if w == 1 else Precision.sint(w)
        ap = Precision.uint(a)
        pts = roofline(F1, wp, ap, ladder)
        roofs[(w, a)] = pts[0].compute_roof_gops
        for p in pts:
            assert p.attainable_gops == min(p.compute_roof_gops,
                                            p.memory_roof_gops)
            assert p.memory_roof_gops == pytest.approx(
                F1.dram_gbytes_per_s * p.intensity_ops_per_byte)
    assert roofs[(1, 1)] > roofs[(2, 2)] > roofs[(8, 8)]


def test_roofline_compute_roof_value():
    pts = roofline(PYNQ, Precision.binary(), Precision.uint(1), [64.0])
    per_mac = mac_lut_cost(1, Precision.binary(), Precision.uint(1), "hls")
    want = 2 * (53200 * 0.70 / per_mac) * 100e6 / 1e9
    assert pts[0].compute_roof_gops == pytest.approx(want)
    assert pts[0].compute_roof_gops == pytest.approx(3668.97, rel=1e-4)


def test_roofline_clock_override():
    base = roofline(F1, Precision.binary(), Precision.uint(1), [1.0])
    fast = roofline(F1, Precision.binary(), Precision.uint(1), [1.0],
                    clock_mhz=500.0)
    assert fast[0].compute_roof_gops == pytest.approx(
        base[0].compute_roof_gops * 500.0 / F1.clock_mhz)


# ---- sweeps ----

def test_pareto_flags():
    assert pareto_flags([(1, 1), (2, 3), (3, 2), (4, 4)]) == [
        True, True, False, True]
    assert pareto_flags([(1, 1), (1, 1)]) == [True, True]
    assert pareto_flags([]) == []


def test_sweep_grid_and_flags():
    net = df_toy()
    points = sweep(net, [PYNQ, TOY_PLATFORM], [(1, 1), (2, 2)],
                   ["auto", "mo"])
    assert len(points) == 8
    eligible = [(p.design.resources.luts, p.design.perf.throughput_gops)
                for p in points if p.design is not None and p.design.is_feasible]
    flags = pareto_flags(eligible)
    got = [p.pareto for p in points
           if p.design is not None and p.design.is_feasible]
    assert got == flags
    assert any(p.pareto for p in points)


def test_sweep_reports_df_misfit(cnv6):
    slim = reorder_maxpool(streamline(cnv6))
    points = sweep(slim, [PYNQ], [(1, 1)], ["df"])
    assert len(points) == 1
    assert points[0].design is None
    assert "offload" in points[0].error
    assert points[0].pareto is False
