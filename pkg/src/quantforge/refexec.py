"""Bit-accurate functional executor for the layer graph.

Deliberately simple: one frame at a time, layer by layer, numpy only.
Convolutions run as im2col followed by a matrix product so the window
and weight layouts used by the hardware blocks (interleaved channels,
output-channel-major) are exercised on every frame.

Integer graphs accumulate in int64; anything touched by a Scale or by
float/fixed-point weights accumulates in float64, which is exact for
integers up to 2**53 (guarded below).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingParameters, ShapeMismatch, SizeMismatch
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
    quantize_directions,
)

# largest integer magnitude float64 represents exactly
_EXACT_FLOAT_INT = 1 << 53
_INT64_GUARD = 1 << 62


@dataclass(frozen=True)
class ValueTensor:
    values: np.ndarray  # (C, H, W)
    precision: Precision

    @property
    def shape(self) -> TensorShape:
        c, h, w = self.values.shape
        return TensorShape(c, h, w)


def im2col_interleaved(arr: np.ndarray, k: int, s: int, pad: int = 0) -> np.ndarray:
    """Lower (C, H, W) to a window matrix, channels interleaved.

    Row r corresponds to output pixel (r // W', r % W'); column
    (ky*k + kx)*C + c holds input[c, y + ky, x + kx]. Padding is zero.
    """
    c, h, w = arr.shape
    if pad:
        arr = np.pad(arr, ((0, 0), (pad, pad), (pad, pad)))
        h, w = h + 2 * pad, w + 2 * pad
    out_h = (h - k) // s + 1
    out_w = (w - k) // s + 1
    if out_h < 1 or out_w < 1:
        raise ShapeMismatch(f"window {k} does not fit padded input {h}x{w}")
    rows = np.empty((out_h * out_w, k * k * c), dtype=arr.dtype)
    for ky in range(k):
        for kx in range(k):
            patch = arr[:, ky:ky + s * out_h:s, kx:kx + s * out_w:s]
            # (C, H', W') -> (H'W', C) into the interleaved column band
            band = patch.reshape(c, -1).T
            rows[:, (ky * k + kx) * c:(ky * k + kx + 1) * c] = band
    return rows


def mvtu(
    rows: np.ndarray,
    weights: np.ndarray,
    thresholds: np.ndarray | None = None,
    descending: np.ndarray | bool = False,
) -> np.ndarray:
    """Matrix of dot products, optionally pushed through thresholding.

    rows: (R, N) input windows; weights: (P, N). With thresholds (P, L-1)
    the result is the (R, P) integer level matrix, otherwise the raw
    accumulator matrix.
    """
    if rows.shape[1] != weights.shape[1]:
        raise SizeMismatch(
            f"window width {rows.shape[1]} != weight width {weights.shape[1]}")
    _overflow_guard(rows, weights)
    acc = rows @ weights.T
    if thresholds is None:
        return acc
    flags = np.full(weights.shape[0], descending) if np.ndim(descending) == 0 \
        else np.asarray(descending, dtype=bool)
    return _levels(acc.T, np.asarray(thresholds), flags).T


def _overflow_guard(a: np.ndarray, b: np.ndarray) -> None:
    n = a.shape[-1]
    bound = n * _absmax(a) * _absmax(b)
    limit = _INT64_GUARD if a.dtype.kind in "iu" and b.dtype.kind in "iu" \
        else _EXACT_FLOAT_INT
    if bound > limit:
        raise SizeMismatch(
            f"dot product bound {bound:.3g} exceeds exact accumulator range")


def _absmax(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _levels(per_channel: np.ndarray, thresholds: np.ndarray,
            descending: np.ndarray) -> np.ndarray:
    """per_channel: (C, ...) values; thresholds: (C, L-1) ascending rows."""
    c = per_channel.shape[0]
    out = np.empty(per_channel.shape, dtype=np.int64)
    for ch in range(c):
        x = per_channel[ch]
        t = thresholds[ch]
        if descending[ch]:
            out[ch] = (x[..., None] <= t).sum(axis=-1)
        else:
            out[ch] = (x[..., None] >= t).sum(axis=-1)
    return out


def level_values(levels: np.ndarray, prec: Precision) -> np.ndarray:
    """Map integer levels to the values the next layer will consume."""
    if prec.kind is PrecisionKind.BINARY:
        return 2 * levels - 1
    if prec.kind is PrecisionKind.TERNARY:
        return levels - 1
    if prec.kind is PrecisionKind.INT:
        return levels - (1 << (prec.bits - 1))
    if prec.kind is PrecisionKind.UINT:
        return levels
    raise ShapeMismatch(f"quantizer output kind {prec.kind.value} unsupported")


def weight_matrix(layer) -> np.ndarray:
    """Weights flattened to (P, N) in interleaved-channel column order."""
    if layer.values is None:
        raise MissingParameters(f"layer {layer.id} has no weight values")
    w = np.asarray(layer.values)
    if isinstance(layer, Convolution):
        # (C', K, K, C) row-major flatten: column (ky*K + kx)*C + c
        w = w.reshape(layer.out_channels, -1)
    if layer.weights.kind is PrecisionKind.FIXED:
        w = w.astype(np.float64) * 2.0 ** -layer.weights.frac_bits
    return w


def execute(net: Network, inp: ValueTensor, return_all: bool = False):
    """Run one frame through the graph, returning the unique sink's output.

    With return_all, the full per-layer output map comes back instead;
    callers use it to inspect intermediate accumulators.
    """
    net = net if net.info is not None else infer_shapes(net)
    sinks = [l.id for l in net.layers if not net.successors(l.id)]
    if len(sinks) != 1:
        raise ShapeMismatch(f"expected one output layer, found {sinks}")

    outputs: dict[str, ValueTensor] = {}
    for layer_id in net.topo_order():
        layer = net.layer(layer_id)
        preds = net.predecessors(layer_id)
        x = outputs[preds[0]] if preds else None
        outputs[layer_id] = _run_layer(net, layer, x,
                                       [outputs[p] for p in preds], inp)
    return outputs if return_all else outputs[sinks[0]]


def _run_layer(net, layer, x, xs, inp) -> ValueTensor:
    info = net.info[layer.id]

    if isinstance(layer, InputLayer):
        vals = np.asarray(inp.values)
        if vals.shape != (layer.shape.c, layer.shape.h, layer.shape.w):
            raise ShapeMismatch(
                f"input values {vals.shape} for declared shape {layer.shape}")
        if vals.dtype.kind not in "iu":
            vals = vals.astype(np.float64)
        else:
            vals = vals.astype(np.int64)
        return ValueTensor(vals, layer.precision)

    if isinstance(layer, Convolution):
        rows = im2col_interleaved(x.values, layer.k, layer.s, layer.pad)
        acc = mvtu(rows, weight_matrix(layer))
        out = acc.T.reshape(layer.out_channels, info.out_shape.h, info.out_shape.w)
        return ValueTensor(out, info.out_precision)

    if isinstance(layer, FullyConnected):
        flat = x.values.reshape(1, -1)
        acc = mvtu(flat, weight_matrix(layer))
        return ValueTensor(acc.reshape(-1, 1, 1), info.out_precision)

    if isinstance(layer, MaxPool):
        c, h, w = x.values.shape
        oh, ow = info.out_shape.h, info.out_shape.w
        windows = np.stack([
            x.values[:, dy:dy + layer.s * oh:layer.s, dx:dx + layer.s * ow:layer.s]
            for dy in range(layer.k) for dx in range(layer.k)
        ])
        return ValueTensor(windows.max(axis=0), info.out_precision)

    if isinstance(layer, Scale):
        if layer.a is None or layer.b is None:
            raise MissingParameters(f"scale {layer.id} has no coefficients")
        a = np.atleast_1d(np.asarray(layer.a, dtype=np.float64))
        b = np.atleast_1d(np.asarray(layer.b, dtype=np.float64))
        vals = a[:, None, None] * x.values + b[:, None, None]
        return ValueTensor(vals, info.out_precision)

    if isinstance(layer, Quantize):
        if layer.thresholds is None:
            raise MissingParameters(f"quantizer {layer.id} has no thresholds")
        flags = quantize_directions(layer, x.values.shape[0])
        levels = _levels(x.values, np.asarray(layer.thresholds), flags)
        return ValueTensor(level_values(levels, layer.out_precision),
                           layer.out_precision)

    if isinstance(layer, Concat):
        vals = np.concatenate([t.values for t in xs], axis=0)
        return ValueTensor(vals, info.out_precision)

    raise ShapeMismatch(f"cannot execute layer type {type(layer).__name__}")


def pack_bits(vals: np.ndarray) -> np.ndarray:
    """{-1,+1} vector to the bit encoding b = (v+1)/2."""
    return ((np.asarray(vals) + 1) // 2).astype(np.uint8)


def xnor_popcount_dot(x_bits: np.ndarray, y_bits: np.ndarray) -> int:
    """Dot product of two {-1,+1} vectors from their bit encodings."""
    n = len(x_bits)
    xnor = np.logical_not(np.logical_xor(x_bits, y_bits))
    return 2 * int(np.count_nonzero(xnor)) - n
