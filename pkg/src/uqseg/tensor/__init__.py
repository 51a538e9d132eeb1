"""Tensor arithmetic with reverse-mode autodiff, plus deterministic RNG."""

from .core import (
    AutodiffError,
    Tensor,
    add,
    concat,
    div,
    exp,
    full,
    getitem,
    grad_enabled,
    index_select,
    log,
    matmul,
    mul,
    neg,
    no_grad,
    ones,
    pow_const,
    reshape,
    set_debug_finite,
    sigmoid,
    sqrt,
    sub,
    tmean,
    tsum,
    unbroadcast,
    zeros,
)
from .conv import ShapeError, conv2d, conv_out_size, conv_transpose2d
from .gradcheck import grad_check
from .nn_ops import batch_norm, log_softmax, prelu, softmax, softmax_channel, take_channel
from .rng import Rng, derive_stream

__all__ = [
    "AutodiffError",
    "Rng",
    "ShapeError",
    "Tensor",
    "add",
    "batch_norm",
    "concat",
    "conv2d",
    "conv_out_size",
    "conv_transpose2d",
    "derive_stream",
    "div",
    "exp",
    "full",
    "getitem",
    "grad_check",
    "grad_enabled",
    "index_select",
    "log",
    "log_softmax",
    "matmul",
    "mul",
    "neg",
    "no_grad",
    "ones",
    "pow_const",
    "prelu",
    "reshape",
    "set_debug_finite",
    "sigmoid",
    "softmax",
    "softmax_channel",
    "sqrt",
    "sub",
    "take_channel",
    "tmean",
    "tsum",
    "unbroadcast",
    "zeros",
]
