"""Typed layer graph for quantized feed-forward networks.

A Network is an immutable DAG of LayerSpec nodes with exactly one Input.
Construction does not run any checks; infer_shapes() walks the graph once,
attaches per-layer shape/precision annotations and raises on structural
problems, validate() reports type-invariant violations as diagnostics
without raising.

Shape convention: feature maps are (C, H, W); flat vectors are (D, 1, 1).
Quantize semantics: per channel, with thresholds stored ascending, the
output level of x is the count of thresholds t with x >= t; a descending
channel counts x <= t instead (the stored order stays ascending, only the
comparison direction changes).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .errors import CycleDetected, MultipleInputs, ShapeMismatch

MAX_BITS = 64


class PrecisionKind(enum.Enum):
    UINT = "uint"
    INT = "int"
    BINARY = "binary"
    TERNARY = "ternary"
    FIXED = "fixed"
    FLOAT = "float"


@dataclass(frozen=True)
class Precision:
    """Bit width plus interpretation of a tensor's elements."""

    bits: int
    kind: PrecisionKind
    int_bits: Optional[int] = None
    frac_bits: Optional[int] = None

    @staticmethod
    def uint(bits: int) -> "Precision":
        return Precision(bits, PrecisionKind.UINT)

    @staticmethod
    def sint(bits: int) -> "Precision":
        return Precision(bits, PrecisionKind.INT)

    @staticmethod
    def binary() -> "Precision":
        return Precision(1, PrecisionKind.BINARY)

    @staticmethod
    def ternary() -> "Precision":
        return Precision(2, PrecisionKind.TERNARY)

    @staticmethod
    def fixed(int_bits: int, frac_bits: int) -> "Precision":
        return Precision(int_bits + frac_bits, PrecisionKind.FIXED, int_bits, frac_bits)

    @staticmethod
    def float32() -> "Precision":
        return Precision(32, PrecisionKind.FLOAT)

    def levels(self) -> int:
        """Distinct representable values when used as a quantizer output."""
        if self.kind is PrecisionKind.TERNARY:
            return 3
        return 1 << self.bits

    def check(self) -> list[str]:
        problems = []
        if not (1 <= self.bits <= MAX_BITS):
            problems.append(f"bits {self.bits} outside [1, {MAX_BITS}]")
        if self.kind is PrecisionKind.BINARY and self.bits != 1:
            problems.append("binary precision requires bits=1")
        if self.kind is PrecisionKind.TERNARY and self.bits != 2:
            problems.append("ternary precision requires bits=2")
        if self.kind is PrecisionKind.FIXED:
            if self.int_bits is None or self.frac_bits is None:
                problems.append("fixed-point precision requires int_bits and frac_bits")
            elif self.int_bits + self.frac_bits != self.bits:
                problems.append(
                    f"fixed-point bits {self.bits} != int_bits {self.int_bits}"
                    f" + frac_bits {self.frac_bits}"
                )
        return problems


ACCUMULATOR = Precision.sint(32)


@dataclass(frozen=True)
class TensorShape:
    c: int
    h: int
    w: int

    def elements(self) -> int:
        return self.c * self.h * self.w

    def flat(self) -> int:
        return self.elements()


@dataclass(frozen=True)
class LayerSpec:
    id: str


@dataclass(frozen=True)
class InputLayer(LayerSpec):
    shape: TensorShape = TensorShape(1, 1, 1)
    precision: Precision = Precision.uint(8)


@dataclass(frozen=True)
class Convolution(LayerSpec):
    k: int = 1
    s: int = 1
    pad: int = 0
    out_channels: int = 1
    weights: Precision = Precision.binary()
    # (C', K, K, C) once loaded; kernel positions row-major, input channel innermost
    values: Optional[np.ndarray] = None


@dataclass(frozen=True)
class FullyConnected(LayerSpec):
    out_size: int = 1
    weights: Precision = Precision.binary()
    in_size: Optional[int] = None
    values: Optional[np.ndarray] = None  # (D', D) once loaded


@dataclass(frozen=True)
class MaxPool(LayerSpec):
    k: int = 2
    s: int = 2


@dataclass(frozen=True)
class Scale(LayerSpec):
    """Per-channel affine y = a*x + b; scalars broadcast across channels."""

    a: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Quantize(LayerSpec):
    out_precision: Precision = Precision.binary()
    thresholds: Optional[np.ndarray] = None  # (C, levels-1), ascending per row
    descending: Union[bool, np.ndarray] = False  # per-channel flags or one flag


@dataclass(frozen=True)
class Concat(LayerSpec):
    pass


@dataclass(frozen=True)
class LayerInfo:
    in_shape: Optional[TensorShape]
    out_shape: TensorShape
    in_precision: Optional[Precision]
    out_precision: Precision


@dataclass(frozen=True)
class Diagnostic:
    code: str
    layer: Optional[str]
    detail: str


@dataclass(frozen=True)
class Network:
    name: str
    layers: tuple[LayerSpec, ...]
    edges: tuple[tuple[str, str], ...]
    info: Optional[Mapping[str, LayerInfo]] = field(default=None, compare=False)

    def layer(self, layer_id: str) -> LayerSpec:
        for layer in self.layers:
            if layer.id == layer_id:
                return layer
        raise KeyError(layer_id)

    def predecessors(self, layer_id: str) -> list[str]:
        return [src for src, dst in self.edges if dst == layer_id]

    def successors(self, layer_id: str) -> list[str]:
        return [dst for src, dst in self.edges if src == layer_id]

    def input_layer(self) -> InputLayer:
        inputs = [l for l in self.layers if isinstance(l, InputLayer)]
        if len(inputs) > 1:
            raise MultipleInputs(f"{len(inputs)} input layers: {[l.id for l in inputs]}")
        if not inputs:
            raise ShapeMismatch("network has no input layer")
        return inputs[0]

    def topo_order(self) -> list[str]:
        """Kahn's algorithm; deterministic (declaration order breaks ties)."""
        incoming = {l.id: 0 for l in self.layers}
        for _, dst in self.edges:
            incoming[dst] += 1
        order: list[str] = []
        ready = [l.id for l in self.layers if incoming[l.id] == 0]
        while ready:
            node = ready.pop(0)
            order.append(node)
            for nxt in self.successors(node):
                incoming[nxt] -= 1
                if incoming[nxt] == 0:
                    ready.append(nxt)
        if len(order) != len(self.layers):
            stuck = sorted(set(incoming) - set(order))
            raise CycleDetected(f"cycle through {stuck}")
        return order

    def compute_ids(self) -> list[str]:
        """Dot-product layers (the ones a folding configuration covers)."""
        return [
            l.id
            for l in ordered(self)
            if isinstance(l, (Convolution, FullyConnected))
        ]

    def stage_ids(self) -> list[str]:
        """Layers that become pipeline stages with their own hardware blocks."""
        return [
            l.id
            for l in ordered(self)
            if isinstance(l, (Convolution, FullyConnected, MaxPool))
        ]


def ordered(net: Network) -> list[LayerSpec]:
    return [net.layer(i) for i in net.topo_order()]


def chain(name: str, layers: Iterable[LayerSpec]) -> Network:
    """Build a linear network: each layer feeds the next."""
    layers = tuple(layers)
    edges = tuple(
        (layers[i].id, layers[i + 1].id) for i in range(len(layers) - 1)
    )
    return Network(name, layers, edges)


def conv_out(n: int, k: int, s: int, pad: int) -> int:
    return (n + 2 * pad - k) // s + 1


def pool_out(n: int, k: int, s: int) -> int:
    return (n - k) // s + 1


def infer_shapes(net: Network) -> Network:
    """Annotate every layer with input/output shape and precision.

    Raises ShapeMismatch / MultipleInputs / CycleDetected; returns a new
    Network (idempotent on one already annotated).
    """
    net.input_layer()  # one-input check up front
    order = net.topo_order()
    info: dict[str, LayerInfo] = {}

    for layer_id in order:
        layer = net.layer(layer_id)
        preds = net.predecessors(layer_id)

        if isinstance(layer, InputLayer):
            if preds:
                raise ShapeMismatch(f"input layer {layer.id} has incoming edges")
            info[layer_id] = LayerInfo(None, layer.shape, None, layer.precision)
            continue

        if not preds:
            raise ShapeMismatch(f"layer {layer_id} has no input")
        if len(preds) > 1 and not isinstance(layer, Concat):
            raise ShapeMismatch(f"layer {layer_id} has {len(preds)} inputs")
        in_infos = [info[p] for p in preds]
        in_shape = in_infos[0].out_shape
        in_prec = in_infos[0].out_precision

        if isinstance(layer, Convolution):
            h = conv_out(in_shape.h, layer.k, layer.s, layer.pad)
            w = conv_out(in_shape.w, layer.k, layer.s, layer.pad)
            if h < 1 or w < 1:
                raise ShapeMismatch(
                    f"{layer_id}: kernel {layer.k} does not fit input"
                    f" {in_shape.h}x{in_shape.w} with pad {layer.pad}"
                )
            out = TensorShape(layer.out_channels, h, w)
            out_prec = ACCUMULATOR
        elif isinstance(layer, FullyConnected):
            d = in_shape.flat()
            if layer.in_size is not None and layer.in_size != d:
                raise ShapeMismatch(
                    f"{layer_id}: declared input size {layer.in_size},"
                    f" inferred {d}"
                )
            out = TensorShape(layer.out_size, 1, 1)
            out_prec = ACCUMULATOR
        elif isinstance(layer, MaxPool):
            if layer.k > in_shape.h or layer.k > in_shape.w:
                raise ShapeMismatch(
                    f"{layer_id}: pool window {layer.k} exceeds input"
                    f" {in_shape.h}x{in_shape.w}"
                )
            out = TensorShape(
                in_shape.c,
                pool_out(in_shape.h, layer.k, layer.s),
                pool_out(in_shape.w, layer.k, layer.s),
            )
            out_prec = in_prec
        elif isinstance(layer, Scale):
            out = in_shape
            out_prec = Precision.float32()
        elif isinstance(layer, Quantize):
            out = in_shape
            out_prec = layer.out_precision
        elif isinstance(layer, Concat):
            hs = {i.out_shape.h for i in in_infos}
            ws = {i.out_shape.w for i in in_infos}
            if len(hs) > 1 or len(ws) > 1:
                raise ShapeMismatch(f"{layer_id}: concat inputs disagree on H/W")
            out = TensorShape(
                sum(i.out_shape.c for i in in_infos), hs.pop(), ws.pop()
            )
            out_prec = in_prec
        else:
            raise ShapeMismatch(f"{layer_id}: unknown layer type {type(layer).__name__}")

        info[layer_id] = LayerInfo(in_shape, out, in_prec, out_prec)

    return replace(net, info=info)


def validate(net: Network) -> list[Diagnostic]:
    """Type-invariant check; empty list iff the network is well formed."""
    diags: list[Diagnostic] = []

    def bad(code: str, layer: Optional[str], detail: str) -> None:
        diags.append(Diagnostic(code, layer, detail))

    try:
        annotated = net if net.info is not None else infer_shapes(net)
    except (ShapeMismatch, MultipleInputs, CycleDetected) as exc:
        bad(exc.code, None, str(exc))
        return diags

    for layer in annotated.layers:
        for prec_name, prec in _precisions_of(layer):
            for problem in prec.check():
                bad("PrecisionKindMismatch", layer.id, f"{prec_name}: {problem}")

        inf = annotated.info[layer.id]
        if isinstance(layer, Convolution) and layer.values is not None:
            want = (layer.out_channels, layer.k, layer.k, inf.in_shape.c)
            if tuple(layer.values.shape) != want:
                bad("WeightCount", layer.id,
                    f"weights {layer.values.shape}, expected {want}")
        if isinstance(layer, FullyConnected) and layer.values is not None:
            want = (layer.out_size, inf.in_shape.flat())
            if tuple(layer.values.shape) != want:
                bad("WeightCount", layer.id,
                    f"weights {layer.values.shape}, expected {want}")
        if isinstance(layer, Quantize):
            diags.extend(_check_quantize(layer, inf))
        if isinstance(layer, Scale):
            for name, arr in (("a", layer.a), ("b", layer.b)):
                if arr is not None and np.ndim(arr) > 0:
                    if len(np.atleast_1d(arr)) not in (1, inf.in_shape.c):
                        bad("ScaleShape", layer.id,
                            f"{name} has {len(np.atleast_1d(arr))} entries for"
                            f" {inf.in_shape.c} channels")
    return diags


def _precisions_of(layer: LayerSpec) -> list[tuple[str, Precision]]:
    if isinstance(layer, InputLayer):
        return [("precision", layer.precision)]
    if isinstance(layer, (Convolution, FullyConnected)):
        return [("weights", layer.weights)]
    if isinstance(layer, Quantize):
        return [("out_precision", layer.out_precision)]
    return []


def _check_quantize(layer: Quantize, inf: LayerInfo) -> list[Diagnostic]:
    diags = []
    prec = layer.out_precision
    if prec.kind is PrecisionKind.FLOAT:
        diags.append(Diagnostic("PrecisionKindMismatch", layer.id,
                                "quantizer cannot emit float levels"))
    if layer.thresholds is not None:
        t = np.asarray(layer.thresholds)
        if t.ndim != 2 or t.shape[0] != inf.in_shape.c:
            diags.append(Diagnostic(
                "ThresholdShape", layer.id,
                f"thresholds {t.shape}, expected ({inf.in_shape.c}, levels-1)"))
        else:
            if t.shape[1] != prec.levels() - 1:
                diags.append(Diagnostic(
                    "ThresholdCount", layer.id,
                    f"{t.shape[1]} thresholds for {prec.levels()} levels"))
            if t.shape[1] > 1 and not bool(np.all(np.diff(t, axis=1) > 0)):
                diags.append(Diagnostic(
                    "ThresholdOrder", layer.id,
                    "per-channel thresholds must be strictly increasing"))
    return diags


def quantize_directions(layer: Quantize, channels: int) -> np.ndarray:
    """Per-channel descending flags as a bool vector."""
    if isinstance(layer.descending, (bool, np.bool_)):
        return np.full(channels, bool(layer.descending))
    flags = np.asarray(layer.descending, dtype=bool)
    if flags.size == 1:
        return np.full(channels, bool(flags.reshape(-1)[0]))
    return flags
