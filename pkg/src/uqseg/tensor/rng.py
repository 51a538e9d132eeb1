"""Deterministic counter-based random streams.

Built on numpy's Philox generator (counter-based, period 2^256 per
stream). A stream is fully identified by ``(seed, stream)``: the same
pair plus the same call sequence always reproduces the same values, and
distinct stream ids give statistically independent streams. Named
substreams are derived by hashing labels, so independent components of
a run can carve out their own streams without coordination.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_stream(*labels) -> int:
    """Stable 64-bit stream id from arbitrary labels."""
    joined = "\x1f".join(str(x) for x in labels)
    digest = hashlib.sha256(joined.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class Rng:
    """One Philox stream keyed by (seed, stream)."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)
        self._gen = np.random.Generator(self._bitgen)

    def child(self, *labels) -> "Rng":
        """Independent stream for a named sub-purpose of this one."""
        return Rng(self.seed, derive_stream(self.stream, *labels))

    # -- draws ---------------------------------------------------------------

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0, dtype=np.float64):
        return self._gen.uniform(low, high, size=size).astype(dtype, copy=False)

    def normal(self, size=None, loc: float = 0.0, scale: float = 1.0, dtype=np.float64):
        return self._gen.normal(loc, scale, size=size).astype(dtype, copy=False)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, n: int, size=None, replace: bool = True):
        return self._gen.choice(n, size=size, replace=replace)

    # -- state (for checkpoints) ----------------------------------------------

    def get_state(self) -> dict:
        st = self._bitgen.state
        return {
            "seed": self.seed,
            "stream": self.stream,
            "counter": [int(v) for v in st["state"]["counter"]],
            "key": [int(v) for v in st["state"]["key"]],
            "buffer": [int(v) for v in st["buffer"]],
            "buffer_pos": int(st["buffer_pos"]),
            "has_uint32": int(st["has_uint32"]),
            "uinteger": int(st["uinteger"]),
        }

    @classmethod
    def from_state(cls, state: dict) -> "Rng":
        rng = cls(state["seed"], state["stream"])
        rng._bitgen.state = {
            "bit_generator": "Philox",
            "state": {
                "counter": np.array(state["counter"], dtype=np.uint64),
                "key": np.array(state["key"], dtype=np.uint64),
            },
            "buffer": np.array(state["buffer"], dtype=np.uint64),
            "buffer_pos": state["buffer_pos"],
            "has_uint32": state["has_uint32"],
            "uinteger": state["uinteger"],
        }
        return rng
