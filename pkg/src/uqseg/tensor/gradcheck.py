"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from .core import Tensor


def grad_check(f, inputs: list[Tensor], eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` must be scalar-valued over the given inputs; each input should
    be float64 for the differences to be trustworthy. Relative error per
    entry is |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
    """
    for t in inputs:
        t.zero_grad()
        t.requires_grad = True
    out = f(*inputs)
    if out.size != 1:
        raise ValueError(f"grad_check needs a scalar function, got output shape {out.shape}")
    out.backward()
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs]

    worst = 0.0
    for t, ga in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        gflat = ga.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = f(*inputs).item()
            flat[i] = orig - eps
            lo = f(*inputs).item()
            flat[i] = orig
            numeric = (hi - lo) / (2.0 * eps)
            denom = max(1e-8, abs(gflat[i]) + abs(numeric))
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst
