import numpy as np
import pytest

from quantforge.errors import ShapeMismatch, SizeMismatch
from quantforge.frontend import load_parameters, parse_topology, random_parameter_blob
from quantforge.ir import (
    Convolution,
    InputLayer,
    Precision,
    Quantize,
    TensorShape,
    chain,
    conv_out,
)
from quantforge.refexec import (
    ValueTensor,
    execute,
    im2col_interleaved,
    level_values,
    mvtu,
    pack_bits,
    xnor_popcount_dot,
)


def ref_windows(arr, k, s, pad):
    """Brute-force window gather, channels innermost within each position."""
    c, h, w = arr.shape
    padded = np.zeros((c, h + 2 * pad, w + 2 * pad), dtype=arr.dtype)
    padded[:, pad:pad + h, pad:pad + w] = arr
    rows = []
    for y in range(0, padded.shape[1] - k + 1, s):
        for x in range(0, padded.shape[2] - k + 1, s):
            row = []
            for ky in range(k):
                for kx in range(k):
                    for ch in range(c):
                        row.append(padded[ch, y + ky, x + kx])
            rows.append(row)
    return np.array(rows)


def test_im2col_against_window_oracle():
    rng = np.random.default_rng(42)
    for _ in range(60):
        c = int(rng.integers(1, 4))
        h = int(rng.integers(2, 8))
        k = int(rng.integers(1, h + 1))
        s = int(rng.integers(1, 3))
        pad = int(rng.integers(0, 2))
        if h + 2 * pad < k:
            continue
        arr = rng.integers(-4, 5, (c, h, h))
        got = im2col_interleaved(arr, k, s, pad)
        want = ref_windows(arr, k, s, pad)
        n_out = conv_out(h, k, s, pad)
        assert got.shape == (n_out * n_out, k * k * c)
        assert np.array_equal(got, want)


def test_im2col_disjoint_tiles():
    arr = np.arange(16).reshape(1, 4, 4)
    got = im2col_interleaved(arr, 2, 2)
    tiles = [
        [0, 1, 4, 5], [2, 3, 6, 7],
        [8, 9, 12, 13], [10, 11, 14, 15],
    ]
    assert got.tolist() == tiles


def test_im2col_full_kernel_single_row():
    arr = np.arange(2 * 3 * 3).reshape(2, 3, 3)
    got = im2col_interleaved(arr, 3, 1)
    assert got.shape == (1, 18)
    # channel-innermost flatten of the whole map
    want = np.transpose(arr, (1, 2, 0)).reshape(-1)
    assert np.array_equal(got[0], want)


def test_im2col_channel_interleave():
    arr = np.array([[[1, 2], [3, 4]], [[10, 20], [30, 40]]])
    got = im2col_interleaved(arr, 1, 1)
    assert got.tolist() == [[1, 10], [2, 20], [3, 30], [4, 40]]


def test_mvtu_matches_naive_dot_and_count():
    rng = np.random.default_rng(7)
    for _ in range(25):
        r, n, p, lv = (int(rng.integers(1, 6)) for _ in range(4))
        lv += 1
        rows = rng.integers(-3, 4, (r, n))
        weights = rng.integers(-3, 4, (p, n))
        thr = np.sort(rng.integers(-10, 11, (p, lv)), axis=1)
        desc = rng.integers(0, 2, p).astype(bool)
        got = mvtu(rows, weights, thr, desc)
        for i in range(r):
            for j in range(p):
                acc = sum(int(rows[i, u]) * int(weights[j, u]) for u in range(n))
                if desc[j]:
                    want = sum(1 for t in thr[j] if acc <= t)
                else:
                    want = sum(1 for t in thr[j] if acc >= t)
                assert got[i, j] == want


def test_mvtu_without_thresholds_returns_accumulators():
    rows = np.array([[1, 2, 3]])
    weights = np.array([[1, 1, 1], [2, 0, -1]])
    assert mvtu(rows, weights).tolist() == [[6, -1]]


def test_mvtu_width_mismatch():
    with pytest.raises(SizeMismatch):
        mvtu(np.ones((1, 3)), np.ones((1, 4)))


def test_overflow_guard_trips():
    big = np.full((1, 4), 2 ** 31, dtype=np.int64)
    with pytest.raises(SizeMismatch):
        mvtu(big, big)


def test_level_values_maps():
    lv = np.array([0, 1, 2, 3])
    assert level_values(lv[:2], Precision.binary()).tolist() == [-1, 1]
    assert level_values(lv[:3], Precision.ternary()).tolist() == [-1, 0, 1]
    assert level_values(lv, Precision.uint(2)).tolist() == [0, 1, 2, 3]
    assert level_values(lv, Precision.sint(2)).tolist() == [-2, -1, 0, 1]


def test_binary_conv_equals_xnor_popcount():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 64))
        x = rng.integers(0, 2, n) * 2 - 1
        w = rng.integers(0, 2, n) * 2 - 1
        assert xnor_popcount_dot(pack_bits(x), pack_bits(w)) == int(x @ w)


def test_maxpool_against_brute_force():
    rng = np.random.default_rng(11)
    net = chain("p", [
        InputLayer("input", TensorShape(2, 6, 6), Precision.sint(8)),
        # identity 1x1 conv keeps the executor path honest
        Convolution("c0", k=1, out_channels=2,
                    weights=Precision.sint(2),
                    values=np.eye(2, dtype=np.int64).reshape(2, 1, 1, 2)),
    ])
    from quantforge.ir import MaxPool, Network
    layers = net.layers + (MaxPool("p0", k=2, s=2),)
    edges = net.edges + (("c0", "p0"),)
    net = Network("p", layers, edges)
    x = rng.integers(-9, 10, (2, 6, 6))
    out = execute(net, ValueTensor(x, Precision.sint(8))).values
    for ch in range(2):
        for y in range(3):
            for xx in range(3):
                window = x[ch, 2 * y:2 * y + 2, 2 * xx:2 * xx + 2]
                assert out[ch, y, xx] == window.max()


def test_execute_toy_conv_by_hand():
    w = np.zeros((1, 2, 2, 1), dtype=np.int64)
    w[0, :, :, 0] = [[1, -1], [1, -1]]
    net = chain("t", [
        InputLayer("input", TensorShape(1, 3, 3), Precision.uint(4)),
        Convolution("c0", k=2, out_channels=1,
                    weights=Precision.sint(2), values=w),
    ])
    x = np.arange(9).reshape(1, 3, 3)
    out = execute(net, ValueTensor(x, Precision.uint(4))).values
    # each window: (a - b) + (d - e) = -2 for this ramp
    assert out.tolist() == [[[-2, -2], [-2, -2]]]


def test_execute_quantize_levels():
    thr = np.array([[2.0, 5.0]])
    w = np.ones((1, 1, 1, 1), dtype=np.int64)
    net = chain("t", [
        InputLayer("input", TensorShape(1, 2, 2), Precision.uint(4)),
        Convolution("c0", k=1, out_channels=1,
                    weights=Precision.sint(2), values=w),
        Quantize("q0", out_precision=Precision.ternary(), thresholds=thr),
    ])
    x = np.array([[[0, 2], [4, 7]]])
    out = execute(net, ValueTensor(x, Precision.uint(4))).values
    # levels 0,1,1,2 -> ternary values -1,0,0,1
    assert out.tolist() == [[[-1, 0], [0, 1]]]


def test_execute_input_shape_checked():
    net = chain("t", [
        InputLayer("input", TensorShape(1, 3, 3), Precision.uint(4)),
        Convolution("c0", k=1, out_channels=1,
                    weights=Precision.sint(2),
                    values=np.ones((1, 1, 1, 1), dtype=np.int64)),
    ])
    with pytest.raises(ShapeMismatch):
        execute(net, ValueTensor(np.zeros((1, 2, 2)), Precision.uint(4)))


def test_execute_bundled_nets_end_to_end(cnv6_with_params, mlp4_with_params):
    rng = np.random.default_rng(1)
    x = rng.integers(0, 256, (3, 32, 32))
    out = execute(cnv6_with_params, ValueTensor(x, Precision.uint(8)))
    assert out.values.shape == (10, 1, 1)

    x = rng.integers(0, 2, (784, 1, 1)) * 2 - 1
    out = execute(mlp4_with_params, ValueTensor(x, Precision.binary()))
    assert out.values.shape == (10, 1, 1)


def test_return_all_exposes_intermediates(mlp4_with_params):
    rng = np.random.default_rng(2)
    x = rng.integers(0, 2, (784, 1, 1)) * 2 - 1
    outs = execute(mlp4_with_params, ValueTensor(x, Precision.binary()),
                   return_all=True)
    assert set(outs) == {l.id for l in mlp4_with_params.layers}
    assert outs["fc0"].values.shape == (1024, 1, 1)
