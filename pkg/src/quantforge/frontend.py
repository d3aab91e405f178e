"""Topology import/export, parameter loading, workload accounting.

Two input formats:

* native: a JSON document with ``name``, ``input`` and an ordered
  ``layers`` list. Layers chain implicitly; an explicit ``inputs`` list of
  earlier layer ids overrides the wiring (needed for concat). Weight and
  activation precisions are declared per layer (``w_bits``/``w_kind``,
  ``a_bits``/``a_kind``).
* darknet-style .cfg: ``[net]``, ``[convolutional]``, ``[maxpool]`` and
  ``[connected]`` sections with the usual keys, extended with
  ``weight_bits``/``weight_kind`` and ``quant_bits``/``quant_kind``.
  ``batch_normalize=1`` expands to an affine Scale layer (the four
  batch-norm parameters are folded to (a, b) ahead of time, so the
  parameter blob carries 2*C values for it). A compute section without
  ``weight_bits`` keeps float32 weights, ready for direct quantization.

Parameter blobs are flat little-endian float32, one layer after another in
graph order: weights output-channel-major with (K, K, C) row-major and the
input channel innermost, then Scale as all a followed by all b, then
quantizer thresholds channel-major ascending. Fixed-point weights store
their integer mantissas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    MissingPrecision,
    SizeMismatch,
    TopologySyntaxError,
    UnsupportedLayerKind,
)
from .ir import (
    Concat,
    Convolution,
    FullyConnected,
    InputLayer,
    MaxPool,
    Network,
    Precision,
    PrecisionKind,
    Quantize,
    Scale,
    TensorShape,
    infer_shapes,
    ordered,
    validate,
)

_KINDS = {k.value: k for k in PrecisionKind}


def parse_precision(bits, kind, int_bits=None, frac_bits=None) -> Precision:
    if kind not in _KINDS:
        raise TopologySyntaxError(
            f"unknown precision kind {kind!r}, expected one of {sorted(_KINDS)}")
    k = _KINDS[kind]
    if k is PrecisionKind.FIXED:
        if int_bits is None or frac_bits is None:
            raise TopologySyntaxError("fixed-point precision needs int_bits and frac_bits")
        return Precision.fixed(int(int_bits), int(frac_bits))
    return Precision(int(bits), k)


def parse_topology(text: str, fmt: str = "native") -> Network:
    if fmt == "native":
        net = _parse_native(text)
    elif fmt == "darknet":
        net = _parse_darknet(text)
    else:
        raise TopologySyntaxError(f"unknown topology format {fmt!r}")
    net = infer_shapes(net)
    diags = validate(net)
    if diags:
        listing = "; ".join(f"{d.code}({d.layer}): {d.detail}" for d in diags)
        raise TopologySyntaxError(f"topology fails validation: {listing}")
    return net


# ---- native format ----

_NATIVE_KEYS = {
    "conv": {"type", "id", "inputs", "k", "s", "pad", "out_channels",
             "w_bits", "w_kind", "w_int_bits", "w_frac_bits"},
    "fc": {"type", "id", "inputs", "out_size", "in_size",
           "w_bits", "w_kind", "w_int_bits", "w_frac_bits"},
    "maxpool": {"type", "id", "inputs", "k", "s"},
    "scale": {"type", "id", "inputs"},
    "quantize": {"type", "id", "inputs", "a_bits", "a_kind", "descending"},
    "concat": {"type", "id", "inputs"},
}


def _parse_native(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologySyntaxError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TopologySyntaxError("topology document must be an object")
    for key in ("name", "input", "layers"):
        if key not in doc:
            raise TopologySyntaxError(f"missing top-level field {key!r}")

    inp = doc["input"]
    try:
        in_prec = parse_precision(inp.get("bits", 8), inp.get("kind", "uint"),
                                  inp.get("int_bits"), inp.get("frac_bits"))
        input_layer = InputLayer(
            "input",
            TensorShape(int(inp["c"]), int(inp["h"]), int(inp["w"])),
            in_prec,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TopologySyntaxError(f"bad input block: {exc}") from exc

    layers = [input_layer]
    edges = []
    prev = "input"
    for idx, entry in enumerate(doc["layers"]):
        if not isinstance(entry, dict) or "type" not in entry:
            raise TopologySyntaxError(f"layer {idx} has no type")
        kind = entry["type"]
        if kind not in _NATIVE_KEYS:
            raise UnsupportedLayerKind(f"layer {idx}: type {kind!r}")
        unknown = set(entry) - _NATIVE_KEYS[kind]
        if unknown:
            raise TopologySyntaxError(
                f"layer {idx} ({kind}): unknown fields {sorted(unknown)}")
        layer_id = entry.get("id", f"{kind}{idx}")
        try:
            layer = _native_layer(kind, layer_id, entry, idx)
        except (TypeError, ValueError) as exc:
            raise TopologySyntaxError(f"layer {idx} ({kind}): {exc}") from exc
        layers.append(layer)
        srcs = entry.get("inputs", [prev])
        if not isinstance(srcs, list) or not srcs:
            raise TopologySyntaxError(f"layer {idx}: inputs must be a non-empty list")
        known = {l.id for l in layers[:-1]}
        for src in srcs:
            if src not in known:
                raise TopologySyntaxError(
                    f"layer {idx}: input {src!r} is not an earlier layer")
            edges.append((src, layer_id))
        prev = layer_id
    return Network(doc["name"], tuple(layers), tuple(edges))


def _native_layer(kind, layer_id, entry, idx):
    if kind in ("conv", "fc"):
        if "w_bits" not in entry or "w_kind" not in entry:
            raise MissingPrecision(
                f"layer {idx} ({kind}) declares no weight precision")
        w = parse_precision(entry["w_bits"], entry["w_kind"],
                            entry.get("w_int_bits"), entry.get("w_frac_bits"))
        if kind == "conv":
            return Convolution(layer_id, k=int(entry["k"]),
                               s=int(entry.get("s", 1)),
                               pad=int(entry.get("pad", 0)),
                               out_channels=int(entry["out_channels"]),
                               weights=w)
        return FullyConnected(layer_id, out_size=int(entry["out_size"]),
                              in_size=(int(entry["in_size"])
                                       if "in_size" in entry else None),
                              weights=w)
    if kind == "maxpool":
        return MaxPool(layer_id, k=int(entry["k"]), s=int(entry.get("s", entry["k"])))
    if kind == "scale":
        return Scale(layer_id)
    if kind == "quantize":
        if "a_bits" not in entry or "a_kind" not in entry:
            raise MissingPrecision(f"layer {idx} (quantize) declares no precision")
        prec = parse_precision(entry["a_bits"], entry["a_kind"])
        return Quantize(layer_id, out_precision=prec,
                        descending=bool(entry.get("descending", False)))
    return Concat(layer_id)


def emit_topology(net: Network) -> str:
    """Native-format text for a Network; parameter values are not emitted."""
    inp = net.input_layer()
    doc = {
        "name": net.name,
        "input": {
            "c": inp.shape.c, "h": inp.shape.h, "w": inp.shape.w,
            **_prec_fields(inp.precision, ""),
        },
        "layers": [],
    }
    order = [l for l in ordered(net) if not isinstance(l, InputLayer)]
    prev = inp.id
    for layer in order:
        entry = _emit_layer(layer)
        srcs = net.predecessors(layer.id)
        if srcs != [prev]:
            entry["inputs"] = srcs
        doc["layers"].append(entry)
        prev = layer.id
    return json.dumps(doc, indent=2) + "\n"


def _prec_fields(prec: Precision, prefix: str) -> dict:
    fields = {prefix + "bits" if prefix else "bits": prec.bits,
              prefix + "kind" if prefix else "kind": prec.kind.value}
    if prec.kind is PrecisionKind.FIXED:
        fields[prefix + "int_bits" if prefix else "int_bits"] = prec.int_bits
        fields[prefix + "frac_bits" if prefix else "frac_bits"] = prec.frac_bits
    return fields


def _emit_layer(layer) -> dict:
    if isinstance(layer, Convolution):
        return {"type": "conv", "id": layer.id, "k": layer.k, "s": layer.s,
                "pad": layer.pad, "out_channels": layer.out_channels,
                **_prec_fields(layer.weights, "w_")}
    if isinstance(layer, FullyConnected):
        entry = {"type": "fc", "id": layer.id, "out_size": layer.out_size,
                 **_prec_fields(layer.weights, "w_")}
        if layer.in_size is not None:
            entry["in_size"] = layer.in_size
        return entry
    if isinstance(layer, MaxPool):
        return {"type": "maxpool", "id": layer.id, "k": layer.k, "s": layer.s}
    if isinstance(layer, Scale):
        return {"type": "scale", "id": layer.id}
    if isinstance(layer, Quantize):
        entry = {"type": "quantize", "id": layer.id,
                 **_prec_fields(layer.out_precision, "a_")}
        if np.any(np.asarray(layer.descending)):
            entry["descending"] = True
        return entry
    if isinstance(layer, Concat):
        return {"type": "concat", "id": layer.id}
    raise UnsupportedLayerKind(type(layer).__name__)


# ---- darknet-style cfg ----

def _parse_darknet(text: str) -> Network:
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].split(";")[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = (line[1:-1].strip().lower(), {})
            sections.append(current)
            continue
        if "=" not in line or current is None:
            raise TopologySyntaxError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        current[1][key.strip()] = value.strip()

    if not sections or sections[0][0] != "net":
        raise TopologySyntaxError("first section must be [net]")
    head = sections[0][1]
    try:
        shape = TensorShape(int(head.get("channels", 3)),
                            int(head.get("height", 1)),
                            int(head.get("width", 1)))
    except ValueError as exc:
        raise TopologySyntaxError(f"[net]: {exc}") from exc
    in_prec = _darknet_act(head.get("input_bits", "8"), head.get("input_kind"))
    layers = [InputLayer("input", shape, in_prec)]
    count = 0

    for name, body in sections[1:]:
        if name == "convolutional":
            k = int(body.get("size", 1))
            if "padding" in body:
                pad = int(body["padding"])
            else:
                pad = k // 2 if body.get("pad", "0") == "1" else 0
            conv = Convolution(f"conv{count}", k=k,
                               s=int(body.get("stride", 1)), pad=pad,
                               out_channels=int(body["filters"]),
                               weights=_darknet_weight(body))
            layers.append(conv)
            layers.extend(_darknet_tail(body, count))
        elif name == "connected":
            fc = FullyConnected(f"fc{count}", out_size=int(body["output"]),
                                weights=_darknet_weight(body))
            layers.append(fc)
            layers.extend(_darknet_tail(body, count))
        elif name == "maxpool":
            k = int(body.get("size", 2))
            layers.append(MaxPool(f"pool{count}", k=k,
                                  s=int(body.get("stride", k))))
        else:
            raise UnsupportedLayerKind(f"section [{name}]")
        count += 1

    edges = tuple((layers[i].id, layers[i + 1].id) for i in range(len(layers) - 1))
    return Network(head.get("name", "network"), tuple(layers), edges)


def _darknet_weight(body: dict) -> Precision:
    if "weight_bits" not in body:
        return Precision.float32()
    bits = int(body["weight_bits"])
    kind = body.get("weight_kind", "binary" if bits == 1 else "int")
    return parse_precision(bits, kind)


def _darknet_act(bits_str: str, kind: str | None) -> Precision:
    bits = int(bits_str)
    return parse_precision(bits, kind or ("binary" if bits == 1 else "uint"))


def _darknet_tail(body: dict, count: int) -> list:
    tail = []
    if body.get("batch_normalize", "0") == "1":
        tail.append(Scale(f"bn{count}"))
    if "quant_bits" in body:
        prec = _darknet_act(body["quant_bits"], body.get("quant_kind"))
        tail.append(Quantize(f"quant{count}", out_precision=prec))
    return tail


# ---- parameter blobs ----

def parameter_slots(net: Network) -> list[tuple[str, int]]:
    """(layer id, value count) for every parametered layer, graph order."""
    net = net if net.info is not None else infer_shapes(net)
    slots = []
    for layer in ordered(net):
        inf = net.info[layer.id]
        if isinstance(layer, Convolution):
            slots.append((layer.id,
                          layer.k * layer.k * inf.in_shape.c * layer.out_channels))
        elif isinstance(layer, FullyConnected):
            slots.append((layer.id, inf.in_shape.flat() * layer.out_size))
        elif isinstance(layer, Scale):
            slots.append((layer.id, 2 * inf.in_shape.c))
        elif isinstance(layer, Quantize):
            slots.append((layer.id,
                          inf.in_shape.c * (layer.out_precision.levels() - 1)))
    return slots


def load_parameters(net: Network, blob) -> Network:
    """Attach concrete values from a flat little-endian float32 blob."""
    net = net if net.info is not None else infer_shapes(net)
    if isinstance(blob, (bytes, bytearray, memoryview)):
        if len(blob) % 4:
            raise SizeMismatch(f"blob length {len(blob)} is not a float32 multiple")
        flat = np.frombuffer(blob, dtype="<f4").astype(np.float64)
    else:
        flat = np.asarray(blob, dtype=np.float64).reshape(-1)

    slots = parameter_slots(net)
    total = sum(n for _, n in slots)
    if flat.size != total:
        raise SizeMismatch(
            f"blob holds {flat.size} values, network needs {total}")

    # slices follow graph order, not declaration order
    replaced = {}
    offset = 0
    for lid, n in slots:
        replaced[lid] = flat[offset:offset + n]
        offset += n
    out_layers = tuple(
        _attach(net, layer, replaced.get(layer.id)) for layer in net.layers
    )
    return infer_shapes(replace(net, layers=out_layers, info=None))


def _attach(net: Network, layer, chunk):
    if chunk is None:
        return layer
    inf = net.info[layer.id]
    if isinstance(layer, Convolution):
        vals = chunk.reshape(layer.out_channels, layer.k, layer.k, inf.in_shape.c)
        return replace(layer, values=_narrow(vals, layer.weights))
    if isinstance(layer, FullyConnected):
        vals = chunk.reshape(layer.out_size, inf.in_shape.flat())
        return replace(layer, values=_narrow(vals, layer.weights))
    if isinstance(layer, Scale):
        c = inf.in_shape.c
        return replace(layer, a=chunk[:c].copy(), b=chunk[c:].copy())
    if isinstance(layer, Quantize):
        c = inf.in_shape.c
        t = chunk.reshape(c, layer.out_precision.levels() - 1)
        return replace(layer, thresholds=t.copy())
    return layer


def _narrow(vals: np.ndarray, prec: Precision) -> np.ndarray:
    """Integer-kind weights become exact int64 arrays when they can."""
    if prec.kind is PrecisionKind.FLOAT:
        return vals.copy()
    if np.all(vals == np.rint(vals)):
        return np.rint(vals).astype(np.int64)
    return vals.copy()


def random_parameter_blob(net: Network, seed: int = 0) -> np.ndarray:
    """Synthetic but plausible parameters in blob layout (for desk work)."""
    net = net if net.info is not None else infer_shapes(net)
    rng = np.random.default_rng(seed)
    parts = []
    for layer in ordered(net):
        inf = net.info[layer.id]
        if isinstance(layer, (Convolution, FullyConnected)):
            if isinstance(layer, Convolution):
                n = layer.k * layer.k * inf.in_shape.c * layer.out_channels
            else:
                n = inf.in_shape.flat() * layer.out_size
            parts.append(_random_weights(rng, n, layer.weights))
        elif isinstance(layer, Scale):
            c = inf.in_shape.c
            parts.append(rng.uniform(0.25, 4.0, c))
            parts.append(rng.uniform(-2.0, 2.0, c))
        elif isinstance(layer, Quantize):
            c = inf.in_shape.c
            levels = layer.out_precision.levels()
            spread = max(np.sqrt(_upstream_fan_in(net, layer.id)), 2.0)
            t = np.sort(rng.normal(0.0, spread, (c, levels - 1)), axis=1)
            parts.append(t.reshape(-1))
    if not parts:
        return np.zeros(0, dtype="<f4")
    return np.concatenate(parts).astype("<f4")


def _upstream_fan_in(net: Network, layer_id: str) -> int:
    """Accumulation width of the nearest dot-product layer upstream."""
    seen = set()
    frontier = [layer_id]
    while frontier:
        cur = frontier.pop()
        for pred in net.predecessors(cur):
            if pred in seen:
                continue
            seen.add(pred)
            layer = net.layer(pred)
            inf = net.info[pred]
            if isinstance(layer, Convolution):
                return layer.k * layer.k * inf.in_shape.c
            if isinstance(layer, FullyConnected):
                return inf.in_shape.flat()
            frontier.append(pred)
    return 16


def _random_weights(rng, n: int, prec: Precision) -> np.ndarray:
    if prec.kind is PrecisionKind.BINARY:
        return rng.choice([-1.0, 1.0], n)
    if prec.kind is PrecisionKind.TERNARY:
        return rng.choice([-1.0, 0.0, 1.0], n)
    if prec.kind is PrecisionKind.INT:
        hi = (1 << (prec.bits - 1)) - 1
        return rng.integers(-hi, hi + 1, n).astype(np.float64)
    if prec.kind is PrecisionKind.UINT:
        return rng.integers(0, 1 << prec.bits, n).astype(np.float64)
    if prec.kind is PrecisionKind.FIXED:
        hi = (1 << (prec.bits - 1)) - 1
        return rng.integers(-hi, hi + 1, n).astype(np.float64)
    return rng.normal(0.0, 0.5, n)


# ---- workload accounting ----

@dataclass(frozen=True)
class WorkloadRow:
    layer: str
    ops: int              # multiply and add counted separately
    macs: int
    w_bits: int
    a_bits: int
    weight_count: int
    weight_mem_bits: int
    activation_mem_bits: int


@dataclass(frozen=True)
class WorkloadReport:
    network: str
    rows: tuple[WorkloadRow, ...]
    total_ops: int
    total_params: int
    ops_by_precision: dict  # (w_bits, a_bits) -> ops

    def to_payload(self) -> dict:
        return {
            "network": self.network,
            "layers": [
                {
                    "layer": r.layer, "ops": r.ops, "macs": r.macs,
                    "w_bits": r.w_bits, "a_bits": r.a_bits,
                    "weight_count": r.weight_count,
                    "weight_mem_bits": r.weight_mem_bits,
                    "activation_mem_bits": r.activation_mem_bits,
                }
                for r in self.rows
            ],
            "total_ops": self.total_ops,
            "total_params": self.total_params,
            "ops_by_precision": {
                f"{w}/{a}": ops
                for (w, a), ops in sorted(self.ops_by_precision.items())
            },
        }


def layer_macs(net: Network, layer_id: str) -> int:
    """Multiply-accumulate count per frame for one dot-product layer."""
    net = net if net.info is not None else infer_shapes(net)
    layer = net.layer(layer_id)
    inf = net.info[layer_id]
    if isinstance(layer, Convolution):
        return (layer.k * layer.k * inf.in_shape.c * layer.out_channels
                * inf.out_shape.h * inf.out_shape.w)
    if isinstance(layer, FullyConnected):
        return inf.in_shape.flat() * layer.out_size
    return 0


def workload_report(net: Network) -> WorkloadReport:
    net = net if net.info is not None else infer_shapes(net)
    rows = []
    by_pair: dict[tuple[int, int], int] = {}
    total_ops = 0
    total_params = 0
    for layer in ordered(net):
        if not isinstance(layer, (Convolution, FullyConnected)):
            continue
        inf = net.info[layer.id]
        macs = layer_macs(net, layer.id)
        ops = 2 * macs
        if isinstance(layer, Convolution):
            params = layer.k * layer.k * inf.in_shape.c * layer.out_channels
        else:
            params = inf.in_shape.flat() * layer.out_size
        pair = (layer.weights.bits, inf.in_precision.bits)
        rows.append(WorkloadRow(
            layer=layer.id, ops=ops, macs=macs,
            w_bits=pair[0], a_bits=pair[1],
            weight_count=params,
            weight_mem_bits=params * layer.weights.bits,
            activation_mem_bits=inf.in_shape.elements() * inf.in_precision.bits,
        ))
        by_pair[pair] = by_pair.get(pair, 0) + ops
        total_ops += ops
        total_params += params
    return WorkloadReport(net.name, tuple(rows), total_ops, total_params, by_pair)
