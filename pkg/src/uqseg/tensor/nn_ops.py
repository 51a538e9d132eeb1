"""Network-level primitives: batchnorm, PReLU, softmax family, gathers."""

from __future__ import annotations

import numpy as np

from .core import Tensor, make_op
from .conv import ShapeError


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """Channelwise normalization over (N, ..spatial..) for (N,C,...) input.

    Train mode normalizes by batch moments (population variance) and
    updates the running buffers in place with the given momentum; eval
    mode normalizes by the running buffers. The epsilon floor keeps the
    op defined for zero-variance batches.
    """
    if x.ndim < 2:
        raise ShapeError(f"batch_norm expects (N,C,...) input, got {x.shape}")
    c = x.shape[1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError(f"gamma/beta must have shape ({c},)")
    axes = (0,) + tuple(range(2, x.ndim))
    bshape = (1, c) + (1,) * (x.ndim - 2)
    m = x.size // c

    if training:
        if m <= 1:
            raise ShapeError("batch_norm train mode needs more than one value per channel")
        mean = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var
    else:
        mean = running_mean.astype(x.dtype, copy=False)
        var = running_var.astype(x.dtype, copy=False)

    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mean.reshape(bshape)) * inv_std.reshape(bshape)
    out = gamma.data.reshape(bshape) * xhat + beta.data.reshape(bshape)

    def backward(g):
        gb = g.sum(axis=axes)
        gg = (g * xhat).sum(axis=axes)
        if training:
            gxhat = g * gamma.data.reshape(bshape)
            s1 = gxhat.sum(axis=axes).reshape(bshape)
            s2 = (gxhat * xhat).sum(axis=axes).reshape(bshape)
            gx = (inv_std.reshape(bshape) / m) * (m * gxhat - s1 - xhat * s2)
        else:
            gx = g * (gamma.data * inv_std).reshape(bshape)
        return gx, gg, gb

    return make_op(out, (x, gamma, beta), backward)


def prelu(x: Tensor, alpha: Tensor) -> Tensor:
    """out = x where x > 0 else alpha * x; alpha is scalar or per channel."""
    if alpha.ndim == 0 or alpha.size == 1:
        a = alpha.data.reshape(())
        ashape = ()
    elif x.ndim >= 2 and alpha.shape == (x.shape[1],):
        ashape = (1, x.shape[1]) + (1,) * (x.ndim - 2)
        a = alpha.data.reshape(ashape)
    else:
        raise ShapeError(f"prelu alpha shape {alpha.shape} not broadcastable to channels of {x.shape}")

    positive = x.data > 0
    out = np.where(positive, x.data, a * x.data)

    def backward(g):
        gx = np.where(positive, g, a * g)
        ga_full = np.where(positive, 0.0, g * x.data)
        if alpha.size == 1:
            ga = np.asarray(ga_full.sum()).reshape(alpha.shape)
        else:
            axes = (0,) + tuple(range(2, x.ndim))
            ga = ga_full.sum(axis=axes)
        return gx, ga

    return make_op(out, (x, alpha), backward)


def log_softmax(x: Tensor, axis: int = 1) -> Tensor:
    """Numerically stabilized log softmax along ``axis``."""
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse

    def backward(g):
        soft = np.exp(out)
        return (g - soft * g.sum(axis=axis, keepdims=True),)

    return make_op(out, (x,), backward)


def softmax(x: Tensor, axis: int = 1) -> Tensor:
    """Stabilized softmax along ``axis``; values in (0,1) summing to 1."""
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - dot),)

    return make_op(out, (x,), backward)


def softmax_channel(x: Tensor) -> Tensor:
    """Softmax over the class axis of an (N,C,...) tensor; requires C >= 2."""
    if x.ndim < 2 or x.shape[1] < 2:
        raise ShapeError(f"softmax_channel needs (N,C,...) with C >= 2, got {x.shape}")
    return softmax(x, axis=1)


def take_channel(x: Tensor, labels: np.ndarray) -> Tensor:
    """Pick x[n, labels[n,...], ...] for an (N,C,...) tensor.

    Labels must be integer class indices shaped like x without the
    channel axis.
    """
    labels = np.asarray(labels)
    expected = x.shape[:1] + x.shape[2:]
    if labels.shape != expected:
        raise ShapeError(f"labels shape {labels.shape} != {expected}")
    c = x.shape[1]
    if labels.min() < 0 or labels.max() >= c:
        raise ValueError(f"label out of range [0,{c}): min={labels.min()}, max={labels.max()}")
    idx = np.expand_dims(labels, axis=1)
    out = np.take_along_axis(x.data, idx, axis=1)[:, 0]

    def backward(g):
        gx = np.zeros_like(x.data)
        np.put_along_axis(gx, idx, np.expand_dims(g, axis=1), axis=1)
        return (gx,)

    return make_op(out, (x,), backward)
