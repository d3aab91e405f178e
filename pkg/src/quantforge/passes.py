"""Graph rewrites: quantization, streamlining, pool reordering, lowering.

streamline() and reorder_maxpool() preserve execution semantics exactly
(checked against the functional executor in the test suite);
direct_quantize() and set_precision() change them by design.

Streamlining detail: a chain of affine Scale layers feeding a quantizer
is folded into the quantizer by rewriting each channel's thresholds to
t' = (t - b) / a. A negative composite scale flips the comparison
direction for that channel and the rewritten row is reversed so storage
stays ascending. Scale layers with no downstream quantizer are left in
place and reported. When neither the scales nor the quantizer carry
loaded values the fold is purely structural (the scales disappear and
the unloaded thresholds stay unloaded); if only one side carries values
the chain is left alone and reported, since a numeric rewrite would
have nothing sound to do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .costmodel import MO, BlockGraph, LayerBlocks
from .errors import (
    EmptyWeights,
    SizeMismatch,
    UnknownPass,
    UnstreamlinedScale,
    ZeroScale,
)
from .frontend import layer_macs
from .ir import (
    Convolution,
    FullyConnected,
    InputLayer,
    MaxPool,
    Network,
    Precision,
    PrecisionKind,
    Quantize,
    Scale,
    infer_shapes,
    ordered,
    quantize_directions,
)


@dataclass(frozen=True)
class PassRecord:
    name: str
    changed: bool
    messages: tuple[str, ...]

    def to_payload(self) -> dict:
        return {"pass": self.name, "changed": self.changed,
                "messages": list(self.messages)}


def _annotated(net: Network) -> Network:
    return net if net.info is not None else infer_shapes(net)


# ---- direct quantization ----

def direct_quantize(net: Network, target_bits: int = 8,
                    log: list[str] | None = None) -> Network:
    """Float weights to per-layer symmetric fixed point.

    The fraction width f is the largest integer with
    max|w| * 2**f <= 2**(bits-1) - 1; values are rounded half to even and
    saturated. Layers without float weights pass through untouched.
    """
    if target_bits < 2:
        raise SizeMismatch("need at least 2 bits for symmetric quantization")
    net = _annotated(net)
    limit = (1 << (target_bits - 1)) - 1
    new_layers = []
    for layer in net.layers:
        if (isinstance(layer, (Convolution, FullyConnected))
                and layer.weights.kind is PrecisionKind.FLOAT):
            if layer.values is None:
                raise EmptyWeights(
                    f"layer {layer.id} has float weights but no values")
            vals = np.asarray(layer.values, dtype=np.float64)
            amax = float(np.max(np.abs(vals))) if vals.size else 0.0
            if amax == 0.0:
                frac = target_bits - 1
            else:
                frac = math.floor(math.log2(limit / amax))
                while amax * 2.0 ** frac > limit:          # float-log safety
                    frac -= 1
                while amax * 2.0 ** (frac + 1) <= limit:
                    frac += 1
            mant = np.clip(np.rint(vals * 2.0 ** frac), -limit, limit)
            prec = Precision.fixed(target_bits - frac, frac)
            new_layers.append(replace(layer, weights=prec,
                                      values=mant.astype(np.int64)))
            if log is not None:
                log.append(f"{layer.id}: quantized to {target_bits}-bit"
                           f" fixed point, {frac} fraction bits")
        else:
            new_layers.append(layer)
    return infer_shapes(replace(net, layers=tuple(new_layers), info=None))


# ---- streamlining ----

def streamline(net: Network, log: list[str] | None = None) -> Network:
    net = _annotated(net)
    layers = list(net.layers)
    edges = list(net.edges)
    removed: set[str] = set()

    def succs(i):
        return [d for s, d in edges if s == i]

    def preds(i):
        return [s for s, d in edges if d == i]

    for q in [l for l in ordered(net) if isinstance(l, Quantize)]:
        chain = []
        cur = q.id
        while True:
            ps = preds(cur)
            if len(ps) != 1:
                break
            cand = net.layer(ps[0])
            if not isinstance(cand, Scale) or len(succs(cand.id)) != 1:
                break
            chain.append(cand)
            cur = cand.id
        if not chain:
            continue

        have_scale_vals = all(s.a is not None and s.b is not None for s in chain)
        no_vals_anywhere = (q.thresholds is None
                            and all(s.a is None and s.b is None for s in chain))
        if not have_scale_vals and not no_vals_anywhere:
            if log is not None:
                log.append(f"{q.id}: scale chain partially loaded, left alone")
            continue
        if have_scale_vals and q.thresholds is None:
            if log is not None:
                log.append(f"{q.id}: thresholds not loaded, scale chain left alone")
            continue

        channels = net.info[q.id].in_shape.c
        if have_scale_vals:
            a_c = np.ones(channels)
            b_c = np.zeros(channels)
            for s in reversed(chain):            # farthest upstream first
                a_s = np.broadcast_to(np.atleast_1d(s.a), (channels,))
                b_s = np.broadcast_to(np.atleast_1d(s.b), (channels,))
                a_c = a_s * a_c
                b_c = a_s * b_c + b_s
            if np.any(a_c == 0):
                bad = [s.id for s in chain]
                raise ZeroScale(f"zero scale factor in chain {bad} before {q.id}")
            t_old = np.asarray(q.thresholds, dtype=np.float64)
            t_new = (t_old - b_c[:, None]) / a_c[:, None]
            neg = a_c < 0
            t_new[neg] = t_new[neg, ::-1]
            flags = quantize_directions(q, channels) ^ neg
            desc = bool(flags[0]) if np.all(flags == flags[0]) else flags
            new_q = replace(q, thresholds=t_new, descending=desc)
        else:
            new_q = q

        layers = [new_q if l.id == q.id else l for l in layers]
        for s in chain:
            ps = preds(s.id)
            # rewrite (s, succ) to (pred, succ) in place so downstream
            # edge order (and with it concat input order) survives
            edges = [(ps[0], b) if a == s.id else (a, b)
                     for a, b in edges if b != s.id]
            removed.add(s.id)
        if log is not None:
            names = "+".join(s.id for s in reversed(chain))
            log.append(f"{q.id}: absorbed {names}")

    layers = [l for l in layers if l.id not in removed]
    # edges may list the quantizer hookups out of order now; normalize
    result = infer_shapes(Network(net.name, tuple(layers), tuple(edges)))
    if log is not None:
        for l in result.layers:
            if isinstance(l, Scale):
                log.append(f"{l.id}: no downstream quantizer, left in place")
    return result


# ---- pool reordering ----

def reorder_maxpool(net: Network, log: list[str] | None = None) -> Network:
    """Swap MaxPool -> Quantize into Quantize -> MaxPool.

    Valid because the level function is monotone when every channel
    compares ascending; descending channels would need min-pooling, so
    those instances stay put and are reported.
    """
    net = _annotated(net)
    layers = list(net.layers)
    edges = list(net.edges)

    def succs(i):
        return [d for s, d in edges if s == i]

    def preds(i):
        return [s for s, d in edges if d == i]

    for pool in [l for l in ordered(net) if isinstance(l, MaxPool)]:
        ss = succs(pool.id)
        if len(ss) != 1:
            continue
        q = net.layer(ss[0])
        if not isinstance(q, Quantize) or len(preds(q.id)) != 1:
            continue
        channels = net.info[pool.id].in_shape.c
        if np.any(quantize_directions(q, channels)):
            if log is not None:
                log.append(f"{pool.id}: quantizer {q.id} compares descending,"
                           " not reordered")
            continue
        ps = preds(pool.id)

        def rewire(edge):
            a, b = edge
            if (a, b) == (ps[0], pool.id):
                return (ps[0], q.id)
            if (a, b) == (pool.id, q.id):
                return (q.id, pool.id)
            if a == q.id:
                return (pool.id, b)
            return edge

        edges = [rewire(e) for e in edges]
        if log is not None:
            log.append(f"{pool.id}: moved behind {q.id}")
    return infer_shapes(Network(net.name, tuple(layers), tuple(edges)))


# ---- precision override (what-if analysis) ----

def set_precision(net: Network, w_bits: int | None = None,
                  a_bits: int | None = None,
                  w_kind: str | None = None, a_kind: str | None = None,
                  log: list[str] | None = None) -> Network:
    """Uniform weight/activation precision override for cost exploration.

    Loaded weight values and thresholds are dropped from retagged layers:
    they describe the old precision. Kind defaults: 1 bit means binary;
    wider weights are signed, wider activations unsigned.
    """
    from .frontend import parse_precision  # local: avoids cycle at import time

    net = _annotated(net)
    new_layers = []
    for layer in net.layers:
        if isinstance(layer, (Convolution, FullyConnected)) and w_bits:
            kind = w_kind or ("binary" if w_bits == 1 else "int")
            prec = parse_precision(w_bits, kind)
            if prec != layer.weights:
                layer = replace(layer, weights=prec, values=None)
        elif isinstance(layer, Quantize) and a_bits:
            kind = a_kind or ("binary" if a_bits == 1 else "uint")
            prec = parse_precision(a_bits, kind)
            if prec != layer.out_precision:
                layer = replace(layer, out_precision=prec, thresholds=None)
        new_layers.append(layer)
    if log is not None:
        log.append(f"precision override: W={w_bits or 'keep'}"
                   f" A={a_bits or 'keep'}")
    return infer_shapes(replace(net, layers=tuple(new_layers), info=None))


# ---- lowering to hardware blocks ----

def lower_to_blocks(net: Network, arch: str) -> BlockGraph:
    """Bind per-stage block lists and geometry for the cost model."""
    net = _annotated(net)
    for layer in net.layers:
        if isinstance(layer, Scale) and _feeds_quantizer(net, layer.id):
            raise UnstreamlinedScale(
                f"scale {layer.id} still feeds a quantizer; run streamline first")

    stages = []
    warnings = []
    for layer in ordered(net):
        if not isinstance(layer, (Convolution, FullyConnected, MaxPool)):
            continue
        inf = net.info[layer.id]
        a_out = _following_quantizer(net, layer.id)
        if a_out is not None and a_out.bits > 4:
            warnings.append(
                f"ThresholdingInfeasible: {layer.id} feeds a {a_out.bits}-bit"
                " quantizer; unrolled thresholds above 4 bits are impractical")
        if isinstance(layer, Convolution):
            stages.append(LayerBlocks(
                layer=layer.id, kind="conv",
                blocks=("SWU", "WM", "TM", "MVU"),
                k=layer.k, s=layer.s,
                in_width=inf.in_shape.w + 2 * layer.pad,
                in_channels=inf.in_shape.c,
                out_channels=layer.out_channels,
                out_pixels=inf.out_shape.h * inf.out_shape.w,
                out_width=inf.out_shape.w,
                macs=layer_macs(net, layer.id),
                weight_count=layer.k * layer.k * inf.in_shape.c * layer.out_channels,
                weights=layer.weights,
                a_in=inf.in_precision, a_out=a_out,
                in_elements=inf.in_shape.elements(),
                out_elem_bits=(a_out.bits if a_out else inf.out_precision.bits)))
        elif isinstance(layer, FullyConnected):
            stages.append(LayerBlocks(
                layer=layer.id, kind="fc",
                blocks=("WM", "TM", "MVU"),
                k=1, s=1, in_width=1,
                in_channels=inf.in_shape.flat(),
                out_channels=layer.out_size,
                out_pixels=1, out_width=1,
                macs=layer_macs(net, layer.id),
                weight_count=inf.in_shape.flat() * layer.out_size,
                weights=layer.weights,
                a_in=inf.in_precision, a_out=a_out,
                in_elements=inf.in_shape.flat(),
                out_elem_bits=(a_out.bits if a_out else inf.out_precision.bits)))
        else:
            stages.append(LayerBlocks(
                layer=layer.id, kind="pool",
                blocks=("SWU", "MP"),
                k=layer.k, s=layer.s,
                in_width=inf.in_shape.w,
                in_channels=inf.in_shape.c,
                out_channels=inf.out_shape.c,
                out_pixels=inf.out_shape.h * inf.out_shape.w,
                out_width=inf.out_shape.w,
                macs=0, weight_count=0, weights=None,
                a_in=inf.in_precision, a_out=a_out,
                in_elements=inf.in_shape.elements(),
                out_elem_bits=(a_out.bits if a_out else inf.in_precision.bits)))
    return BlockGraph(net.name, arch, tuple(stages), tuple(warnings))


def _feeds_quantizer(net: Network, scale_id: str) -> bool:
    cur = scale_id
    while True:
        ss = net.successors(cur)
        if len(ss) != 1:
            return False
        nxt = net.layer(ss[0])
        if isinstance(nxt, Quantize):
            return True
        if isinstance(nxt, Scale):
            cur = nxt.id
            continue
        return False


def _following_quantizer(net: Network, layer_id: str) -> Precision | None:
    ss = net.successors(layer_id)
    if len(ss) == 1 and isinstance(net.layer(ss[0]), Quantize):
        return net.layer(ss[0]).out_precision
    return None


# ---- pipeline driver ----

def _parse_spec(spec: str) -> tuple[str, str | None]:
    name, _, arg = spec.partition(":")
    return name.strip(), (arg.strip() or None)


def run_pipeline(net: Network, specs: list[str]) -> tuple[Network, list[PassRecord]]:
    """Apply named passes in order. ``name:arg`` passes an argument
    (``direct_quantize:6``, ``set_precision:2/4``)."""
    records = []
    for spec in specs:
        name, arg = _parse_spec(spec)
        messages: list[str] = []
        before = net
        if name == "direct_quantize":
            bits = int(arg) if arg else 8
            net = direct_quantize(net, bits, log=messages)
        elif name == "streamline":
            net = streamline(net, log=messages)
        elif name == "reorder_maxpool":
            net = reorder_maxpool(net, log=messages)
        elif name == "set_precision":
            if not arg or "/" not in arg:
                raise UnknownPass(
                    f"set_precision needs W/A bits, e.g. set_precision:1/2")
            w_str, a_str = arg.split("/", 1)
            net = set_precision(net,
                                w_bits=int(w_str) if w_str else None,
                                a_bits=int(a_str) if a_str else None,
                                log=messages)
        else:
            raise UnknownPass(f"unknown pass {name!r}")
        changed = (before.layers != net.layers or before.edges != net.edges)
        records.append(PassRecord(name, changed, tuple(messages)))
    return net, records


PASS_NAMES = ("direct_quantize", "streamline", "reorder_maxpool", "set_precision")
