"""Counter-based deterministic random number generation.

The generator state is the pair ``(seed, counter)`` and the i-th raw draw is a
pure function of both, so equal seeds give bit-identical streams and parallel
work can be split by deriving child seeds instead of sharing state.

Algorithm (so independent implementations can cross-check streams):

- raw 64-bit word i:  ``mix64(seed + (counter + i + 1) * GOLDEN)`` where
  ``GOLDEN = 0x9E3779B97F4A7C15`` and ``mix64`` is the SplitMix64 finalizer
  (xor-shift 30, mul 0xBF58476D1CE4E5B9, xor-shift 27, mul
  0x94D049BB133111EB, xor-shift 31), all modulo 2**64.
- uniform in [0, 1): top 53 bits of the raw word divided by 2**53.
- standard normal: Box-Muller on consecutive uniform pairs, with the first
  uniform shifted into (0, 1] to keep the logarithm finite.
- Rayleigh(scale): ``scale * sqrt(-2 ln U)`` with U in (0, 1].
- child seed for stream id s: ``mix64(seed XOR mix64(fnv1a64(s)))``.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)

_INV_2_53 = 1.0 / float(1 << 53)


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64 arrays (wrapping mults)."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def derive_seed(seed: int, stream_id) -> int:
    """Child seed for a named stream: seed XOR mixed hash of the stream id.

    ``stream_id`` may be an int or a string label like ``"sim/0007"``.
    """
    if isinstance(stream_id, str):
        sid = _fnv1a64(stream_id.encode("utf-8"))
    else:
        sid = int(stream_id) & 0xFFFFFFFFFFFFFFFF
    mixed = int(_mix64(np.array([sid], dtype=np.uint64))[0])
    child = (int(seed) & 0xFFFFFFFFFFFFFFFF) ^ mixed
    return int(_mix64(np.array([child], dtype=np.uint64))[0])


class Rng:
    """Seeded counter-based generator (single-owner; derive children to fork)."""

    def __init__(self, seed: int):
        self.seed = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self.counter = 0

    def child(self, stream_id) -> "Rng":
        """Independent generator for a named substream of this seed."""
        return Rng(derive_seed(int(self.seed), stream_id))

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix64(self.seed + idx * _GOLDEN)

    def uniform(self, shape=None) -> np.ndarray | float:
        """Uniforms in [0, 1) with 53-bit resolution."""
        n = 1 if shape is None else int(np.prod(shape))
        u = (self._raw(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        if shape is None:
            return float(u[0])
        return u.reshape(shape)

    def standard_normal(self, shape=None) -> np.ndarray | float:
        """Standard normal draws via Box-Muller."""
        n = 1 if shape is None else int(np.prod(shape))
        m = (n + 1) // 2
        raw = (self._raw(2 * m) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        u1 = raw[:m] + _INV_2_53  # shift into (0, 1] so log stays finite
        u2 = raw[m:]
        r = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        z = np.empty(2 * m, dtype=np.float64)
        z[0::2] = r * np.cos(ang)
        z[1::2] = r * np.sin(ang)
        z = z[:n]
        if shape is None:
            return float(z[0])
        return z.reshape(shape)

    def rayleigh(self, scale, shape=None) -> np.ndarray | float:
        """Rayleigh draws: scale * sqrt(-2 ln U), U in (0, 1]."""
        n = 1 if shape is None else int(np.prod(shape))
        u = (self._raw(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        r = np.sqrt(-2.0 * np.log(u + _INV_2_53))
        out = np.asarray(scale, dtype=np.float64) * (
            r if shape is None else r.reshape(shape)
        )
        if shape is None:
            return float(out)
        return out

    def randint(self, n: int) -> int:
        """One integer uniform on {0, ..., n-1}."""
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        return int(self.uniform() * n)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n) (argsort of 53-bit keys)."""
        if n < 0:
            raise ValueError("permutation needs n >= 0")
        keys = self.uniform((n,)) if n else np.empty(0)
        return np.argsort(keys, kind="stable")
