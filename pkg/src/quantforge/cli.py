"""Command-line front door.

Every subcommand that has a service twin builds its structured document
through the same *_doc function the service calls, so the two surfaces
cannot drift apart. Human output is a convenience rendering of the same
data. Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import costmodel, dse, frontend, refexec
from .costmodel import CostCoefficients, DEFAULT_COEFFS, PlatformSpec
from .errors import IndivisibleFolding, QuantforgeError, TopologySyntaxError
from .ir import Network, Precision
from .passes import PASS_NAMES, lower_to_blocks, run_pipeline
from .serialize import render_structured

INTENSITY_LADDER = [2.0 ** e for e in range(-3, 8)]
PRECISION_PAIRS = [(1, 1), (1, 2), (2, 2), (4, 4), (8, 8)]


# ---- shared request plumbing (CLI flags and service bodies funnel here) ----

def detect_format(path: str, fmt: str) -> str:
    if fmt != "auto":
        return fmt
    return "darknet" if path.endswith(".cfg") else "native"


def load_network(path: str, fmt: str = "auto",
                 passes: list[str] | None = None) -> Network:
    text = Path(path).read_text()
    net = frontend.parse_topology(text, detect_format(path, fmt))
    if passes:
        net, _ = run_pipeline(net, passes)
    return net


def resolve_platform(spec: str, path=None) -> PlatformSpec:
    """A catalog name, or a path to a single-entry catalog file."""
    if Path(spec).is_file():
        catalog = costmodel.load_platform_catalog(spec)
        if len(catalog) != 1:
            raise TopologySyntaxError(
                f"{spec} holds {len(catalog)} platforms; pass a name instead")
        return next(iter(catalog.values()))
    return costmodel.get_platform(spec, path)


def resolve_coeffs(spec: str) -> CostCoefficients:
    if spec == "uncalibrated":
        return DEFAULT_COEFFS
    if Path(spec).is_file():
        return CostCoefficients.from_json(Path(spec).read_text())
    raise TopologySyntaxError(
        f"no coefficients profile or file named {spec!r}")


def as_int(value) -> int:
    # interface numbers may arrive as decimal strings
    if isinstance(value, bool):
        raise TopologySyntaxError(f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value, 10)
        except ValueError:
            pass
    raise TopologySyntaxError(f"expected an integer, got {value!r}")


def as_float(value) -> float:
    if isinstance(value, bool):
        raise TopologySyntaxError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise TopologySyntaxError(f"expected a number, got {value!r}")


def parse_folding_arg(text: str) -> dict:
    """conv0=1,2,1;conv1=4,4,1 -> {layer: (p, q, m)}"""
    folding = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        layer, _, triple = part.partition("=")
        nums = triple.split(",")
        if not layer or len(nums) != 3:
            raise TopologySyntaxError(
                f"bad folding entry {part!r}, want layer=P,Q,M")
        folding[layer.strip()] = tuple(as_int(n.strip()) for n in nums)
    return folding


def folding_from_doc(doc) -> dict:
    """Service-side folding: [{layer, p, q, m}], {layer: [p, q, m]}, or
    {layer: {p, q, m}}."""
    if isinstance(doc, dict):
        items = []
        for key, value in doc.items():
            if isinstance(value, dict):
                items.append({"layer": key, **value})
            elif isinstance(value, (list, tuple)) and len(value) == 3:
                items.append({"layer": key, "p": value[0], "q": value[1],
                              "m": value[2]})
            else:
                raise TopologySyntaxError(
                    f"folding for {key!r} must be [p, q, m] or an object")
    elif isinstance(doc, list):
        items = doc
    else:
        raise TopologySyntaxError("folding must be a list or an object")
    folding = {}
    for entry in items:
        try:
            folding[entry["layer"]] = (as_int(entry["p"]), as_int(entry["q"]),
                                       as_int(entry["m"]))
        except (KeyError, TypeError):
            raise TopologySyntaxError(
                f"folding entry {entry!r} needs layer, p, q, m")
    return folding


def coeffs_from_doc(doc) -> CostCoefficients:
    fields = {}
    for key, value in doc.items():
        if key not in CostCoefficients.__dataclass_fields__:
            raise TopologySyntaxError(f"unknown coefficient field {key!r}")
        current = getattr(DEFAULT_COEFFS, key)
        if isinstance(current, bool):
            fields[key] = bool(value)
        elif isinstance(current, int):
            fields[key] = as_int(value)
        elif isinstance(current, float):
            fields[key] = as_float(value)
        else:
            fields[key] = str(value)
    return CostCoefficients(**fields)


def _precision_pair(w_bits: int, a_bits: int) -> tuple[Precision, Precision]:
    w = Precision.binary() if w_bits == 1 else Precision.sint(w_bits)
    a = Precision.binary() if a_bits == 1 else Precision.uint(a_bits)
    return w, a


# ---- structured document builders ----

def report_doc(net: Network) -> dict:
    return frontend.workload_report(net).to_payload()


def passes_doc(net: Network, specs: list[str]) -> dict:
    out, log = run_pipeline(net, specs)
    return {
        "passes": list(specs),
        "log": [r.to_payload() for r in log],
        "topology": frontend.emit_topology(out),
    }


def estimate_doc(net: Network, platform: PlatformSpec, arch: str,
                 folding: dict | None = None,
                 coeffs: CostCoefficients = DEFAULT_COEFFS) -> dict:
    blocks = lower_to_blocks(net, arch)
    compute = {s.layer: s for s in blocks.stages if s.kind in ("conv", "fc")}
    if folding is None:
        folding = dse.all_ones_folding(blocks)
    else:
        for layer in folding:
            if layer not in compute:
                raise IndivisibleFolding(
                    f"folding names {layer!r}, which is not a compute layer")
        folding = {l: folding.get(l, (1, 1, 1)) for l in compute}
    for layer, (p, q, m) in folding.items():
        s = compute[layer]
        if s.in_channels % q or s.out_channels % p or s.out_width % m:
            raise IndivisibleFolding(
                f"{layer}: ({p},{q},{m}) does not divide "
                f"(C'={s.out_channels}, C={s.in_channels}, N'={s.out_width})")
    total = dse.design_resources(blocks, folding, platform, coeffs)
    ok, slack = costmodel.within_budget(total, platform)
    return {
        "network": net.name,
        "platform": platform.name,
        "arch": arch,
        "folding": [{"layer": l, "p": p, "q": q, "m": m}
                    for l, (p, q, m) in folding.items()],
        "resources": total.to_payload(),
        "budget": platform.budget(),
        "slack": slack,
        "feasible": ok,
        "warnings": list(blocks.warnings),
    }


def balance_doc(net: Network, platform: PlatformSpec,
                coeffs: CostCoefficients = DEFAULT_COEFFS) -> dict:
    return dse.balance_dataflow(net, platform, coeffs).to_payload()


def schedule_doc(net: Network, engine: tuple[int, int, int],
                 platform: PlatformSpec,
                 coeffs: CostCoefficients = DEFAULT_COEFFS) -> dict:
    sched, perf = dse.schedule_multilayer_offload(net, engine, platform, coeffs)
    return {
        "network": net.name,
        "platform": platform.name,
        "schedule": sched.to_payload(),
        "performance": perf.to_payload(),
    }


def roofline_doc(platform: PlatformSpec, w_bits: int, a_bits: int,
                 intensities: list[float] | None = None,
                 coeffs: CostCoefficients = DEFAULT_COEFFS,
                 clock_mhz: float | None = None) -> dict:
    w, a = _precision_pair(w_bits, a_bits)
    points = dse.roofline(platform, w, a, intensities or INTENSITY_LADDER,
                          coeffs, clock_mhz)
    return {
        "platform": platform.name,
        "w_bits": w_bits,
        "a_bits": a_bits,
        "clock_mhz": clock_mhz if clock_mhz is not None else platform.clock_mhz,
        "points": [p.to_payload() for p in points],
    }


def sweep_doc(net: Network, platforms: list[PlatformSpec],
              pairs: list[tuple[int, int]], archs: list[str],
              coeffs: CostCoefficients = DEFAULT_COEFFS) -> dict:
    points = dse.sweep(net, platforms, pairs, archs, coeffs)
    return {"network": net.name,
            "points": [p.to_payload() for p in points]}


def calibrate_doc(records, base: CostCoefficients = DEFAULT_COEFFS) -> dict:
    coeffs, fits = costmodel.fit_coefficients(records, base)
    return {
        "coefficients": asdict(coeffs),
        "fits": [f.to_payload() for f in fits],
    }


# ---- human renderings ----

def _table(headers, rows, out):
    widths = [len(h) for h in headers]
    rendered = [[str(c) for c in row] for row in rows]
    for row in rendered:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    out.write(line.rstrip() + "\n")
    out.write("  ".join("-" * w for w in widths) + "\n")
    for row in rendered:
        out.write("  ".join(c.ljust(w)
                            for c, w in zip(row, widths)).rstrip() + "\n")


def _human_report(doc, out):
    out.write(f"network: {doc['network']}\n")
    _table(
        ["layer", "ops", "params", "W", "A"],
        [[r["layer"], f"{r['ops']:,}", f"{r['weight_count']:,}",
          r["w_bits"], r["a_bits"]] for r in doc["layers"]],
        out)
    out.write(f"total ops:    {doc['total_ops']:,}\n")
    out.write(f"total params: {doc['total_params']:,}\n")
    for pair, ops in doc["ops_by_precision"].items():
        out.write(f"  [{pair}] {ops:,} ops\n")


def _human_resources(doc, out):
    res, slack = doc["resources"], doc["slack"]
    out.write(f"arch {doc['arch']} on {doc['platform']}: "
              f"{'feasible' if doc['feasible'] else 'INFEASIBLE'}\n")
    _table(["resource", "used", "slack"],
           [["luts", f"{res['luts']:.0f}", f"{slack['luts']:.0f}"],
            ["bram18", res["bram18"], f"{slack['bram18']:.0f}"],
            ["dsps", res["dsps"], f"{slack['dsps']:.0f}"]],
           out)
    for w in doc.get("warnings", []):
        out.write(f"warning: {w}\n")


def _human_design(doc, out):
    out.write(f"network {doc['network']} on {doc['platform']}: "
              f"arch={doc['arch']} "
              f"{'feasible' if doc['feasible'] else 'INFEASIBLE'}\n")
    _table(["layer", "P", "Q", "M"],
           [[f["layer"], f["p"], f["q"], f["m"]] for f in doc["folding"]],
           out)
    res = doc["resources"]
    out.write(f"resources: {res['luts']:.0f} LUT, {res['bram18']} BRAM18, "
              f"{res['dsps']} DSP\n")
    perf = doc["performance"]
    out.write(f"performance: {perf['fps']:.1f} fps, "
              f"{perf['throughput_gops']:.2f} GOp/s "
              f"(bottleneck {perf['bottleneck']}, "
              f"±{100 * perf['confidence_band']:.0f}%)\n")
    for w in doc.get("warnings", []):
        out.write(f"warning: {w}\n")


def _human_schedule(doc, out):
    sched = doc["schedule"]
    eng = sched["engine"]
    out.write(f"engine P={eng['p']} Q={eng['q']} M={eng['m']} "
              f"on {doc['platform']}\n")
    _table(["layer", "compute", "weights", "maps", "time", "bound"],
           [[e["layer"], f"{e['compute_cycles']:.0f}",
             f"{e['weight_transfer_cycles']:.0f}",
             f"{e['fm_transfer_cycles']:.0f}",
             f"{e['time_cycles']:.0f}", e["bound"]]
            for e in sched["entries"]],
           out)
    perf = doc["performance"]
    out.write(f"frame: {sched['frame_cycles']:.0f} cycles, "
              f"{perf['fps']:.1f} fps, "
              f"{perf['throughput_gops']:.2f} GOp/s, "
              f"utilization {sched['compute_utilization']:.2f}\n")


def _human_roofline(doc, out):
    out.write(f"{doc['platform']} at W={doc['w_bits']} A={doc['a_bits']} "
              f"({doc['clock_mhz']:.0f} MHz)\n")
    _table(["ops/byte", "compute roof", "memory roof", "attainable"],
           [[f"{p['intensity_ops_per_byte']:g}",
             f"{p['compute_roof_gops']:.1f}",
             f"{p['memory_roof_gops']:.1f}",
             f"{p['attainable_gops']:.1f}"] for p in doc["points"]],
           out)


def _human_sweep(doc, out):
    rows = []
    for p in doc["points"]:
        if "error" in p:
            rows.append([p["platform"], f"{p['w_bits']}/{p['a_bits']}",
                         p["arch_request"], "-", "-", "-", p["error"]])
        else:
            rows.append([p["platform"], f"{p['w_bits']}/{p['a_bits']}",
                         p["arch"], f"{p['luts']:.0f}",
                         f"{p['throughput_gops']:.2f}",
                         "*" if p["pareto"] else "",
                         "" if p["feasible"] else "infeasible"])
    _table(["platform", "W/A", "arch", "luts", "GOp/s", "pareto", "note"],
           rows, out)


def _human_calibration(doc, out):
    for fit in doc["fits"]:
        out.write(f"{fit['model']}: {fit['records']} records, "
                  f"max rel err {fit['max_rel_err']:.4f}, "
                  f"outside band {100 * fit['frac_outside_band']:.1f}%\n")
    c = doc["coefficients"]
    out.write(f"mac_lut_per_bitop = {c['mac_lut_per_bitop']:.6g}\n")
    out.write(f"hls_overhead_factor = {c['hls_overhead_factor']:.6g}\n")
    out.write(f"mvu_c0 = {c['mvu_c0']:.6g}, mvu_c1 = {c['mvu_c1']:.6g}\n")


def _emit(doc, args, human) -> None:
    if args.format == "structured":
        sys.stdout.write(render_structured(doc))
    else:
        human(doc, sys.stdout)


# ---- subcommands ----

def _cmd_parse(args) -> int:
    net = load_network(args.topology, args.fmt)
    if args.format == "structured":
        sys.stdout.write(render_structured({
            "name": net.name,
            "layer_count": len(net.layers),
            "topology": frontend.emit_topology(net),
        }))
        return 0
    rows = []
    for layer in net.layers:
        inf = net.info[layer.id]
        shape = inf.out_shape
        rows.append([layer.id, type(layer).__name__.lower(),
                     f"{shape.c}x{shape.h}x{shape.w}",
                     str(inf.out_precision.bits)])
    out = sys.stdout
    out.write(f"network: {net.name}\n")
    _table(["layer", "kind", "out shape", "bits"], rows, out)
    return 0


def _cmd_report(args) -> int:
    net = load_network(args.topology, args.fmt, args.passes)
    _emit(report_doc(net), args, _human_report)
    return 0


def _cmd_passes(args) -> int:
    net = load_network(args.topology, args.fmt)
    doc = passes_doc(net, args.passes or [])
    if args.format == "structured":
        sys.stdout.write(render_structured(doc))
        return 0
    for rec in doc["log"]:
        status = "changed" if rec["changed"] else "no change"
        sys.stderr.write(f"{rec['name']}: {status}\n")
        for msg in rec["messages"]:
            sys.stderr.write(f"  {msg}\n")
    sys.stdout.write(doc["topology"])
    return 0


def _cmd_estimate(args) -> int:
    net = load_network(args.topology, args.fmt, args.passes)
    platform = resolve_platform(args.platform)
    coeffs = resolve_coeffs(args.coeffs)
    folding = parse_folding_arg(args.folding) if args.folding else None
    doc = estimate_doc(net, platform, args.arch, folding, coeffs)
    _emit(doc, args, _human_resources)
    return 0


def _cmd_balance(args) -> int:
    net = load_network(args.topology, args.fmt, args.passes)
    platform = resolve_platform(args.platform)
    coeffs = resolve_coeffs(args.coeffs)
    _emit(balance_doc(net, platform, coeffs), args, _human_design)
    return 0


def _cmd_schedule(args) -> int:
    net = load_network(args.topology, args.fmt, args.passes)
    platform = resolve_platform(args.platform)
    coeffs = resolve_coeffs(args.coeffs)
    nums = args.engine.split(",")
    if len(nums) != 3:
        raise TopologySyntaxError("--engine wants P,Q,M")
    engine = tuple(as_int(n) for n in nums)
    _emit(schedule_doc(net, engine, platform, coeffs), args, _human_schedule)
    return 0


def _cmd_roofline(args) -> int:
    platform = resolve_platform(args.platform)
    coeffs = resolve_coeffs(args.coeffs)
    intensities = ([as_float(t) for t in args.intensities.split(",")]
                   if args.intensities else None)
    doc = roofline_doc(platform, args.wbits, args.abits, intensities,
                       coeffs, args.clock)
    _emit(doc, args, _human_roofline)
    return 0


def _cmd_sweep(args) -> int:
    net = load_network(args.topology, args.fmt, args.passes)
    coeffs = resolve_coeffs(args.coeffs)
    if args.platforms:
        platforms = [resolve_platform(p) for p in args.platforms.split(",")]
    else:
        platforms = list(costmodel.load_platform_catalog().values())
    if args.pairs:
        pairs = []
        for token in args.pairs.split(","):
            w, _, a = token.partition("/")
            pairs.append((as_int(w), as_int(a)))
    else:
        pairs = list(PRECISION_PAIRS)
    archs = args.arch.split(",")
    for arch in archs:
        if arch not in ("df", "mo", "auto"):
            raise TopologySyntaxError(f"unknown architecture {arch!r}")
    _emit(sweep_doc(net, platforms, pairs, archs, coeffs), args, _human_sweep)
    return 0


def _cmd_calibrate(args) -> int:
    records = costmodel.load_measurements(Path(args.measurements).read_text())
    base = resolve_coeffs(args.base)
    doc = calibrate_doc(records, base)
    if args.out:
        coeffs = CostCoefficients(**doc["coefficients"])
        Path(args.out).write_text(coeffs.to_json())
    _emit(doc, args, _human_calibration)
    return 0


def _read_input_tensor(path: str, shape) -> np.ndarray:
    raw = Path(path).read_bytes()
    if path.endswith((".bin", ".f32")):
        flat = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    else:
        try:
            tokens = raw.decode("utf-8").split()
            flat = np.array([float(t) for t in tokens], dtype=np.float64)
        except (UnicodeDecodeError, ValueError) as exc:
            raise TopologySyntaxError(f"unreadable input tensor: {exc}")
    expected = shape.c * shape.h * shape.w
    if flat.size != expected:
        raise TopologySyntaxError(
            f"input has {flat.size} values, topology wants {expected}")
    if np.all(flat == np.rint(flat)):
        flat = flat.astype(np.int64)
    return flat.reshape(shape.c, shape.h, shape.w)


def _cmd_exec(args) -> int:
    # parameters attach to the as-written graph; passes rewrite them
    net = load_network(args.topology, args.fmt)
    if args.params:
        blob = np.frombuffer(Path(args.params).read_bytes(), dtype="<f4")
        net = frontend.load_parameters(net, blob)
    if args.passes:
        net, _ = run_pipeline(net, args.passes)
    inp_layer = net.input_layer()
    values = _read_input_tensor(args.input, inp_layer.shape)
    out = refexec.execute(net, refexec.ValueTensor(values, inp_layer.precision))
    flat = np.asarray(out.values).reshape(-1)
    for v in flat:
        if flat.dtype.kind in "iu":
            sys.stdout.write(f"{int(v)}\n")
        else:
            sys.stdout.write(f"{float(v)!r}\n")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(session_dir=args.session_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---- parser ----

def _add_topology(sub, with_passes=True):
    sub.add_argument("topology", help="topology file (native JSON or cfg)")
    sub.add_argument("--fmt", choices=["auto", "native", "darknet"],
                     default="auto")
    if with_passes:
        sub.add_argument("--passes", type=lambda s: s.split(","),
                         metavar="P1,P2,...",
                         help=f"pipeline from: {', '.join(PASS_NAMES)}")


def _add_output(sub):
    sub.add_argument("--format", choices=["human", "structured"],
                     default="human")


def _add_costing(sub):
    sub.add_argument("--platform", required=True,
                     help="catalog name or platform file")
    sub.add_argument("--coeffs", default="uncalibrated",
                     help="coefficients profile or file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantforge",
        description="Quantized-network accelerator estimation toolkit")
    cmds = parser.add_subparsers(dest="command", required=True)

    p = cmds.add_parser("parse", help="check a topology and echo canonical form")
    _add_topology(p, with_passes=False)
    _add_output(p)
    p.set_defaults(fn=_cmd_parse)

    p = cmds.add_parser("report", help="per-layer workload statistics")
    _add_topology(p)
    _add_output(p)
    p.set_defaults(fn=_cmd_report)

    p = cmds.add_parser("passes", help="run transform passes, emit topology")
    _add_topology(p)
    _add_output(p)
    p.set_defaults(fn=_cmd_passes)

    p = cmds.add_parser("estimate", help="resource estimate at a folding")
    _add_topology(p)
    _add_costing(p)
    _add_output(p)
    p.add_argument("--arch", choices=["df", "mo"], default="df")
    p.add_argument("--folding", metavar="L=P,Q,M;...",
                   help="per-layer folding, unlisted layers get 1,1,1")
    p.set_defaults(fn=_cmd_estimate)

    p = cmds.add_parser("balance", help="work-balanced design search")
    _add_topology(p)
    _add_costing(p)
    _add_output(p)
    p.set_defaults(fn=_cmd_balance)

    p = cmds.add_parser("schedule", help="offload schedule on a shared engine")
    _add_topology(p)
    _add_costing(p)
    _add_output(p)
    p.add_argument("--engine", required=True, metavar="P,Q,M")
    p.set_defaults(fn=_cmd_schedule)

    p = cmds.add_parser("roofline", help="compute and bandwidth roofs")
    _add_costing(p)
    _add_output(p)
    p.add_argument("--wbits", type=int, default=1)
    p.add_argument("--abits", type=int, default=1)
    p.add_argument("--intensities", metavar="I1,I2,...")
    p.add_argument("--clock", type=float, metavar="MHZ")
    p.set_defaults(fn=_cmd_roofline)

    p = cmds.add_parser("sweep", help="platform x precision design sweep")
    _add_topology(p)
    _add_output(p)
    p.add_argument("--platforms", metavar="NAME,NAME,...",
                   help="default: every catalog entry")
    p.add_argument("--pairs", metavar="W/A,W/A,...",
                   help="precision pairs, default 1/1,1/2,2/2,4/4,8/8")
    p.add_argument("--arch", default="auto", metavar="df,mo,auto")
    p.add_argument("--coeffs", default="uncalibrated")
    p.set_defaults(fn=_cmd_sweep)

    p = cmds.add_parser("calibrate", help="fit cost coefficients to data")
    p.add_argument("measurements", help="CSV with header N,W,A,P,Q,M,impl,luts")
    p.add_argument("--base", default="uncalibrated")
    p.add_argument("--out", metavar="FILE", help="write fitted profile here")
    _add_output(p)
    p.set_defaults(fn=_cmd_calibrate)

    p = cmds.add_parser("exec", help="run a frame through the reference executor")
    _add_topology(p)
    p.add_argument("--params", metavar="FILE",
                   help="flat float32 parameter blob")
    p.add_argument("--input", required=True, metavar="FILE",
                   help="input tensor, flat text or .bin/.f32 float32")
    p.set_defaults(fn=_cmd_exec)

    p = cmds.add_parser("serve", help="start the estimation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--session-dir", metavar="DIR",
                   help="write-through snapshot directory")
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except QuantforgeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
