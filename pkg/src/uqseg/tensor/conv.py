"""2-D convolution and transpose convolution via im2col + BLAS."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .core import Tensor, make_op


class ShapeError(ValueError):
    pass


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    """(N,C,H,W) -> (N, C*kh*kw, Ho*Wo) patch matrix."""
    n, c, h, w = x.shape
    if pad > 0:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    hp, wp = x.shape[2], x.shape[3]
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    sn, sc, sh, sw = x.strides
    windows = as_strided(
        x,
        shape=(n, c, kh, kw, ho, wo),
        strides=(sn, sc, sh, sw, sh * stride, sw * stride),
        writeable=False,
    )
    return np.ascontiguousarray(windows).reshape(n, c * kh * kw, ho * wo)


def _col2im(cols: np.ndarray, x_shape, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    """Adjoint of _im2col: scatter-add patch columns back to (N,C,H,W)."""
    n, c, h, w = x_shape
    hp, wp = h + 2 * pad, w + 2 * pad
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    out = np.zeros((n, c, hp, wp), dtype=cols.dtype)
    cols = cols.reshape(n, c, kh, kw, ho, wo)
    for i in range(kh):
        for j in range(kw):
            out[:, :, i : i + ho * stride : stride, j : j + wo * stride : stride] += cols[:, :, i, j]
    if pad > 0:
        out = out[:, :, pad : pad + h, pad : pad + w]
    return np.ascontiguousarray(out)


def conv_out_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None, stride: int = 1, pad: int = 0) -> Tensor:
    """Cross-correlation of (N,Cin,H,W) with (Cout,Cin,kH,kW) filters."""
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError(f"conv2d expects 4-D input/kernel, got {x.shape} and {weight.shape}")
    n, cin, h, w = x.shape
    cout, cin_k, kh, kw = weight.shape
    if cin != cin_k:
        raise ShapeError(f"conv2d channel mismatch: input has {cin}, kernel expects {cin_k}")
    if stride < 1:
        raise ShapeError(f"conv2d stride must be >= 1, got {stride}")
    if kh > h + 2 * pad or kw > w + 2 * pad:
        raise ShapeError(f"kernel {kh}x{kw} larger than padded input {h + 2 * pad}x{w + 2 * pad}")
    if bias is not None and bias.shape != (cout,):
        raise ShapeError(f"bias shape {bias.shape} != ({cout},)")
    if not np.all(np.isfinite(x.data)):
        raise FloatingPointError("conv2d input contains non-finite values")

    ho = conv_out_size(h, kh, stride, pad)
    wo = conv_out_size(w, kw, stride, pad)
    cols = _im2col(x.data, kh, kw, stride, pad)  # (N, K, P)
    wmat = weight.data.reshape(cout, cin * kh * kw)
    out = wmat @ cols  # (N, Cout, P) via broadcast matmul
    out = out.reshape(n, cout, ho, wo)
    if bias is not None:
        out = out + bias.data.reshape(1, cout, 1, 1)

    def backward(g):
        gmat = g.reshape(n, cout, ho * wo)
        gw = np.einsum("nop,nkp->ok", gmat, cols, optimize=True).reshape(weight.shape)
        gcols = np.swapaxes(wmat, 0, 1) @ gmat  # (N, K, P)
        gx = _col2im(gcols, x.shape, kh, kw, stride, pad)
        gb = gmat.sum(axis=(0, 2)) if bias is not None else None
        return (gx, gw, gb) if bias is not None else (gx, gw)

    parents = (x, weight, bias) if bias is not None else (x, weight)
    return make_op(out, parents, backward)


def conv_transpose2d(x: Tensor, weight: Tensor, bias: Tensor | None, stride: int = 2, pad: int = 0) -> Tensor:
    """Transpose (fractionally-strided) convolution; weight is (Cin,Cout,kH,kW).

    Output spatial size is (H-1)*stride - 2*pad + k, the exact adjoint of
    conv2d with the same geometry. Used for 2x decoder upsampling.
    """
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError(f"conv_transpose2d expects 4-D input/kernel, got {x.shape} and {weight.shape}")
    n, cin, h, w = x.shape
    cin_k, cout, kh, kw = weight.shape
    if cin != cin_k:
        raise ShapeError(f"conv_transpose2d channel mismatch: input has {cin}, kernel expects {cin_k}")
    ho = (h - 1) * stride - 2 * pad + kh
    wo = (w - 1) * stride - 2 * pad + kw
    if ho <= 0 or wo <= 0:
        raise ShapeError("conv_transpose2d output size is not positive")

    wmat = weight.data.reshape(cin, cout * kh * kw)
    xmat = x.data.reshape(n, cin, h * w)
    cols = np.swapaxes(wmat, 0, 1) @ xmat  # (N, Cout*kh*kw, H*W)
    out = _col2im(cols, (n, cout, ho, wo), kh, kw, stride, pad)
    if bias is not None:
        out = out + bias.data.reshape(1, cout, 1, 1)

    def backward(g):
        gcols = _im2col(g, kh, kw, stride, pad)  # (N, Cout*kh*kw, H*W)
        gx = (wmat @ gcols).reshape(x.shape)
        gw = np.einsum("ncp,nkp->ck", xmat, gcols, optimize=True).reshape(weight.shape)
        gb = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return (gx, gw, gb) if bias is not None else (gx, gw)

    parents = (x, weight, bias) if bias is not None else (x, weight)
    return make_op(out, parents, backward)
