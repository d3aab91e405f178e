"""Resource cost models, platform catalog, coefficient calibration.

All memory estimates count BRAM18 blocks with a 512x36 geometry: a logical
memory of D words times B bits occupies ceil(D/512) * ceil(B/36) blocks,
and parallel units replicate whole stripes. LUT estimates follow the
per-block linear models; their coefficients ship with an uncalibrated
default profile and can be refitted from synthesis measurements
(fit_coefficients).

Weight-kind cost adjustments, applied to the arithmetic term of both the
standalone MAC model and the full compute-unit model:

* binary weights cost 1.35x the plain integer datapath, except against
  1-bit activations where the XNOR form brings the factor back to 1.0;
* ternary weights take a further 1.20x on top of the binary factor;
* 2-bit signed weights take yet another 1.20x on top of ternary.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

from .errors import (
    DegenerateFit,
    IndivisibleFolding,
    SizeMismatch,
    TopologySyntaxError,
    UnknownPlatform,
)
from .ir import Precision, PrecisionKind

HLS = "hls"
RTL = "rtl"


def _ceildiv(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class ResourceEstimate:
    luts: float = 0.0
    bram18: int = 0
    dsps: int = 0

    def __add__(self, other: "ResourceEstimate") -> "ResourceEstimate":
        return ResourceEstimate(self.luts + other.luts,
                                self.bram18 + other.bram18,
                                self.dsps + other.dsps)

    def max(self, other: "ResourceEstimate") -> "ResourceEstimate":
        return ResourceEstimate(max(self.luts, other.luts),
                                max(self.bram18, other.bram18),
                                max(self.dsps, other.dsps))

    def to_payload(self) -> dict:
        return {"luts": self.luts, "bram18": self.bram18, "dsps": self.dsps}


ZERO = ResourceEstimate()


@dataclass(frozen=True)
class BramGeometry:
    depth: int = 512
    width: int = 36


@dataclass(frozen=True)
class PlatformSpec:
    name: str
    luts_total: int
    bram18_total: int
    dsp_total: int
    clock_mhz: float
    dram_gbytes_per_s: float
    shell: ResourceEstimate = ZERO
    bram_geometry: BramGeometry = BramGeometry()
    lut_ceiling: float = 0.70
    bram_ceiling: float = 0.90
    dsp_ceiling: float = 0.90

    def budget(self) -> dict[str, float]:
        """Usable amount per resource class after the utilization ceilings."""
        return {
            "luts": self.luts_total * self.lut_ceiling,
            "bram18": self.bram18_total * self.bram_ceiling,
            "dsps": self.dsp_total * self.dsp_ceiling,
        }

    def clock_hz(self) -> float:
        return self.clock_mhz * 1e6

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "luts_total": self.luts_total,
            "bram18_total": self.bram18_total,
            "dsp_total": self.dsp_total,
            "clock_mhz": self.clock_mhz,
            "dram_gbytes_per_s": self.dram_gbytes_per_s,
            "shell": self.shell.to_payload(),
            "lut_ceiling": self.lut_ceiling,
            "bram_ceiling": self.bram_ceiling,
            "dsp_ceiling": self.dsp_ceiling,
        }


@dataclass(frozen=True)
class CostCoefficients:
    profile: str = "uncalibrated"
    mac_lut_per_bitop: float = 1.4          # RTL datapath LUTs per N*W*A
    hls_overhead_factor: float = 1.45
    binaryweight_factor: float = 1.35
    ternary_step_factor: float = 1.20
    int2_step_factor: float = 1.20
    mvu_c0: float = 200.0                   # per-unit control overhead
    mvu_c1: float = 2.0                     # LUTs per M*P*Q*W*A
    mp_lut_per_ac: float = 1.0
    swu_luts_df: float = 426.0
    swu_luts_mo: float = 1050.0
    swu_dsps_mo: int = 15
    mo_control_luts: float = 2000.0
    mo_control_bram18: int = 8
    mo_control_dsps: int = 0
    use_dsp_for_8bit: bool = False
    confidence_band: float = 0.30

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "CostCoefficients":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TopologySyntaxError(f"invalid coefficients file: {exc}") from exc
        known = {f for f in CostCoefficients.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise TopologySyntaxError(
                f"unknown coefficient fields {sorted(unknown)}")
        return CostCoefficients(**doc)


DEFAULT_COEFFS = CostCoefficients()


# ---- elementary cost functions ----

def weight_kind_factor(weights: Precision, activations: Precision,
                       coeffs: CostCoefficients = DEFAULT_COEFFS) -> float:
    kind = weights.kind
    if kind is PrecisionKind.BINARY:
        if activations.bits == 1:
            return 1.0  # XNOR datapath, no multiplier penalty
        return coeffs.binaryweight_factor
    if kind is PrecisionKind.TERNARY:
        return coeffs.binaryweight_factor * coeffs.ternary_step_factor
    if kind is PrecisionKind.INT and weights.bits == 2:
        return (coeffs.binaryweight_factor * coeffs.ternary_step_factor
                * coeffs.int2_step_factor)
    return 1.0


def mac_lut_cost(n: int, weights: Precision, activations: Precision,
                 impl: str = HLS,
                 coeffs: CostCoefficients = DEFAULT_COEFFS) -> float:
    """LUTs for an n-element multiply-accumulate datapath."""
    if impl not in (HLS, RTL):
        raise SizeMismatch(f"impl must be {RTL!r} or {HLS!r}, got {impl!r}")
    cost = coeffs.mac_lut_per_bitop * n * weights.bits * activations.bits
    cost *= weight_kind_factor(weights, activations, coeffs)
    if impl == HLS:
        cost *= coeffs.hls_overhead_factor
    return cost


def bram_blocks(depth_words: int, width_bits: int,
                geom: BramGeometry = BramGeometry()) -> int:
    """Blocks for one logical memory, fragmented by physical geometry."""
    if depth_words == 0 or width_bits == 0:
        return 0
    return _ceildiv(depth_words, geom.depth) * _ceildiv(width_bits, geom.width)


def swu_bram(m: int, k: int, s: int, n: int, c: int, a_bits: int,
             geom: BramGeometry = BramGeometry()) -> int:
    """Sliding-window buffer blocks.

    m parallel window generators each keep ceil(k/s)+1 row groups of
    s*n words, c*a_bits wide.
    """
    if s > k:
        raise SizeMismatch(f"stride {s} larger than window {k}")
    stripes = m * (_ceildiv(k, s) + 1)
    return stripes * bram_blocks(s * n, c * a_bits, geom)


def wm_bram(p: int, q: int, w_bits: int, weight_count: int,
            geom: BramGeometry = BramGeometry()) -> int:
    """Weight memory blocks: p stripes of depth weight_count/(q*p), q*w wide."""
    if weight_count % (q * p):
        raise IndivisibleFolding(
            f"q*p = {q * p} does not divide weight count {weight_count}")
    omega = weight_count // (q * p)
    return p * bram_blocks(omega, q * w_bits, geom)


def mvu_lut(m: int, p: int, q: int, weights: Precision, activations: Precision,
            coeffs: CostCoefficients = DEFAULT_COEFFS) -> float:
    arith = (coeffs.mvu_c1 * m * p * q * weights.bits * activations.bits
             * weight_kind_factor(weights, activations, coeffs))
    return coeffs.mvu_c0 + arith


def mp_lut(a_bits: int, c: int,
           coeffs: CostCoefficients = DEFAULT_COEFFS) -> float:
    return coeffs.mp_lut_per_ac * a_bits * c


# ---- per-layer hardware block descriptors (filled in by lowering) ----

@dataclass(frozen=True)
class LayerBlocks:
    """One pipeline stage with its block list and bound geometry."""

    layer: str
    kind: str                     # conv | fc | pool
    blocks: tuple[str, ...]       # subset of SWU, WM, TM, MVU, MP
    k: int
    s: int
    in_width: int                 # feature-map width entering the stage
    in_channels: int              # C, or D for fc
    out_channels: int             # C', or D' for fc
    out_pixels: int               # H' * W' (1 for fc)
    out_width: int                # N' (1 for fc)
    macs: int
    weight_count: int
    weights: Precision | None
    a_in: Precision
    a_out: Precision | None       # downstream quantizer output, if any
    in_elements: int = 0          # unpadded input map size, for transfers
    out_elem_bits: int = 0        # bit width leaving the stage


@dataclass(frozen=True)
class BlockGraph:
    network: str
    arch: str                     # df | mo
    stages: tuple[LayerBlocks, ...]
    warnings: tuple[str, ...] = ()

    def stage(self, layer: str) -> LayerBlocks:
        for s in self.stages:
            if s.layer == layer:
                return s
        raise KeyError(layer)


DF = "df"
MO = "mo"


def layer_cost(stage: LayerBlocks, folding: tuple[int, int, int], arch: str,
               platform: PlatformSpec,
               coeffs: CostCoefficients = DEFAULT_COEFFS) -> ResourceEstimate:
    """Resource estimate for one pipeline stage at a given folding."""
    p, q, m = folding
    geom = platform.bram_geometry
    luts = 0.0
    bram = 0
    dsps = 0
    for block in stage.blocks:
        if block == "SWU":
            bram += swu_bram(m, stage.k, stage.s, stage.in_width,
                             stage.in_channels, stage.a_in.bits, geom)
            luts += coeffs.swu_luts_mo if arch == MO else coeffs.swu_luts_df
            if arch == MO:
                dsps += coeffs.swu_dsps_mo
        elif block == "WM":
            bram += wm_bram(p, q, stage.weights.bits, stage.weight_count, geom)
        elif block == "MVU":
            if (coeffs.use_dsp_for_8bit and stage.weights.bits == 8
                    and stage.a_in.bits == 8):
                luts += coeffs.mvu_c0
                dsps += m * p * q
            else:
                luts += mvu_lut(m, p, q, stage.weights, stage.a_in, coeffs)
        elif block == "MP":
            luts += mp_lut(stage.a_in.bits, stage.in_channels, coeffs)
        elif block == "TM":
            pass  # threshold storage folded into the compute unit model
        else:
            raise SizeMismatch(f"unknown block kind {block}")
    return ResourceEstimate(luts, bram, dsps)


def accelerator_cost(stage_costs: list[ResourceEstimate], arch: str,
                     platform: PlatformSpec,
                     coeffs: CostCoefficients = DEFAULT_COEFFS) -> ResourceEstimate:
    """Shell plus architecture cost; DF sums stages, MO max-reduces them."""
    if arch == DF:
        total = ZERO
        for c in stage_costs:
            total = total + c
        return platform.shell + total
    if arch == MO:
        peak = ZERO
        for c in stage_costs:
            peak = peak.max(c)
        control = ResourceEstimate(coeffs.mo_control_luts,
                                   coeffs.mo_control_bram18,
                                   coeffs.mo_control_dsps)
        return platform.shell + peak + control
    raise SizeMismatch(f"unknown architecture {arch!r}")


def within_budget(total: ResourceEstimate,
                  platform: PlatformSpec) -> tuple[bool, dict[str, float]]:
    """Per-resource slack against budget * ceiling; negative slack fails."""
    budget = platform.budget()
    slack = {
        "luts": budget["luts"] - total.luts,
        "bram18": budget["bram18"] - total.bram18,
        "dsps": budget["dsps"] - total.dsps,
    }
    return all(v >= 0 for v in slack.values()), slack


# ---- platform catalog ----

PLATFORM_DIR_ENV = "QUANTFORGE_PLATFORM_DIR"
_CATALOG_FILE = "platforms.json"


def load_platform_catalog(path: str | Path | None = None) -> dict[str, PlatformSpec]:
    """Catalog from an explicit path, $QUANTFORGE_PLATFORM_DIR, or the
    shipped data, in that order of preference."""
    if path is None:
        env_dir = os.environ.get(PLATFORM_DIR_ENV)
        if env_dir:
            path = Path(env_dir) / _CATALOG_FILE
    if path is not None:
        text = Path(path).read_text()
    else:
        text = (resources.files("quantforge.data") / _CATALOG_FILE).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologySyntaxError(f"invalid platform catalog: {exc}") from exc
    catalog = {}
    for entry in doc.get("platforms", []):
        shell = entry.get("shell", {})
        geom = entry.get("bram_geometry", {})
        spec = PlatformSpec(
            name=entry["name"],
            luts_total=int(entry["luts_total"]),
            bram18_total=int(entry["bram18_total"]),
            dsp_total=int(entry.get("dsp_total", 0)),
            clock_mhz=float(entry["clock_mhz"]),
            dram_gbytes_per_s=float(entry.get("dram_gbytes_per_s", 1.0)),
            shell=ResourceEstimate(float(shell.get("luts", 0)),
                                   int(shell.get("bram18", 0)),
                                   int(shell.get("dsps", 0))),
            bram_geometry=BramGeometry(int(geom.get("depth", 512)),
                                       int(geom.get("width", 36))),
            lut_ceiling=float(entry.get("lut_ceiling", 0.70)),
            bram_ceiling=float(entry.get("bram_ceiling", 0.90)),
            dsp_ceiling=float(entry.get("dsp_ceiling", 0.90)),
        )
        catalog[spec.name] = spec
    return catalog


def get_platform(name: str,
                 path: str | Path | None = None) -> PlatformSpec:
    catalog = load_platform_catalog(path)
    if name not in catalog:
        raise UnknownPlatform(
            f"platform {name!r} not in catalog ({', '.join(sorted(catalog))})")
    return catalog[name]


# ---- calibration ----

@dataclass(frozen=True)
class MeasurementRecord:
    n: int
    w: int
    a: int
    p: int
    q: int
    m: int
    impl: str
    luts: float

    def parallelism(self) -> int:
        return self.p * self.q * self.m


_CSV_HEADER = ["N", "W", "A", "P", "Q", "M", "impl", "luts"]


def load_measurements(text: str) -> list[MeasurementRecord]:
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    if not rows or [c.strip() for c in rows[0]] != _CSV_HEADER:
        raise TopologySyntaxError(
            f"measurement CSV must start with header {','.join(_CSV_HEADER)}")
    records = []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(_CSV_HEADER):
            raise TopologySyntaxError(f"line {lineno}: expected 8 fields")
        try:
            records.append(MeasurementRecord(
                n=int(row[0]), w=int(row[1]), a=int(row[2]),
                p=int(row[3]), q=int(row[4]), m=int(row[5]),
                impl=row[6].strip().lower(), luts=float(row[7])))
        except ValueError as exc:
            raise TopologySyntaxError(f"line {lineno}: {exc}") from exc
        if records[-1].impl not in (RTL, HLS):
            raise TopologySyntaxError(
                f"line {lineno}: impl must be rtl or hls")
    return records


@dataclass(frozen=True)
class FitReport:
    model: str
    records: int
    max_rel_err: float
    mean_rel_err: float
    frac_outside_band: float
    band: float

    def to_payload(self) -> dict:
        return {
            "model": self.model,
            "records": self.records,
            "max_rel_err": self.max_rel_err,
            "mean_rel_err": self.mean_rel_err,
            "frac_outside_band": self.frac_outside_band,
            "band": self.band,
        }


def _slope_through_origin(xs, ys) -> float:
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    return sxy / sxx


def _ols_line(xs, ys) -> tuple[float, float]:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return my - slope * mx, slope


def _rel_errors(xs, ys, predict) -> list[float]:
    errs = []
    for x, y in zip(xs, ys):
        pred = predict(x)
        errs.append(abs(y - pred) / max(abs(pred), 1e-12))
    return errs


def _require_spread(xs, model: str) -> None:
    if len(set(xs)) < 2:
        raise DegenerateFit(
            f"{model}: all {len(xs)} records share one complexity value,"
            " nothing to fit")


def fit_coefficients(
    records: list[MeasurementRecord],
    base: CostCoefficients = DEFAULT_COEFFS,
) -> tuple[CostCoefficients, list[FitReport]]:
    """Least-squares refit of the MAC and compute-unit LUT models.

    Records with P*Q*M == 1 calibrate the standalone MAC model
    (complexity N*W*A, slope through the origin, one slope per impl);
    the rest calibrate the compute-unit model (complexity M*P*Q*W*A,
    ordinary least squares with intercept).
    """
    if not records:
        raise DegenerateFit("no measurement records")
    mac = [r for r in records if r.parallelism() == 1]
    mvu = [r for r in records if r.parallelism() > 1]
    reports = []
    coeffs = base

    if mac:
        slopes = {}
        for impl in (RTL, HLS):
            subset = [r for r in mac if r.impl == impl]
            if not subset:
                continue
            xs = [r.n * r.w * r.a for r in subset]
            ys = [r.luts for r in subset]
            _require_spread(xs, f"mac-{impl}")
            slopes[impl] = _slope_through_origin(xs, ys)
            errs = _rel_errors(xs, ys, lambda x, s=slopes[impl]: s * x)
            reports.append(_report(f"mac-{impl}", errs, base.confidence_band))
        if RTL in slopes:
            coeffs = replace(coeffs, mac_lut_per_bitop=slopes[RTL])
            if HLS in slopes:
                coeffs = replace(
                    coeffs, hls_overhead_factor=slopes[HLS] / slopes[RTL])
        elif HLS in slopes:
            coeffs = replace(
                coeffs,
                mac_lut_per_bitop=slopes[HLS] / base.hls_overhead_factor)

    if mvu:
        xs = [r.m * r.p * r.q * r.w * r.a for r in mvu]
        ys = [r.luts for r in mvu]
        _require_spread(xs, "compute-unit")
        c0, c1 = _ols_line(xs, ys)
        coeffs = replace(coeffs, mvu_c0=c0, mvu_c1=c1)
        errs = _rel_errors(xs, ys, lambda x: c0 + c1 * x)
        reports.append(_report("compute-unit", errs, base.confidence_band))

    return replace(coeffs, profile="fitted"), reports


def _report(model: str, errs: list[float], band: float) -> FitReport:
    outside = sum(1 for e in errs if e > band)
    return FitReport(
        model=model,
        records=len(errs),
        max_rel_err=max(errs),
        mean_rel_err=sum(errs) / len(errs),
        frac_outside_band=outside / len(errs),
        band=band,
    )
