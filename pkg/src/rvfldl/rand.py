"""Seeded random streams with a bit-reproducible generator.

The generator is SplitMix64: output ``k`` (1-based) of a stream with seed
``s`` is ``mix64(s + k * GOLDEN_GAMMA mod 2**64)``.  Because each output is a
pure function of ``(seed, k)``, draws vectorise over numpy ``uint64`` arrays
and the stream position is just a count of consumed outputs.  The full
algorithm, the uniform and normal transforms and the seed packing are laid
out in ``docs/determinism.md``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_M1 = 0xBF58476D1CE4E5B9
_MIX_M2 = 0x94D049BB133111EB
_TWO_POW_M52 = 2.0 ** -52

__all__ = [
    "HalfCauchyParams",
    "RandomStream",
    "child_seed",
    "half_cauchy_from_uniform",
    "mix64",
    "sample_half_cauchy",
    "sample_standard_normal",
    "seeded_stream",
]


def mix64(z: int) -> int:
    """SplitMix64 finaliser on a Python int (bijective on 64-bit words)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_M1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 multiplication wraps modulo 2**64, matching the integer version
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_M2)
    return z ^ (z >> np.uint64(31))


class RandomStream:
    """Single-owner SplitMix64 stream.

    Parameters
    ----------
    seed : int
        64-bit unsigned seed.  Values outside ``[0, 2**64)`` are rejected.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.origin_seed = seed
        self.position = 0

    def __repr__(self) -> str:
        return f"RandomStream(origin_seed={self.origin_seed}, position={self.position})"

    def reset(self) -> None:
        self.position = 0

    def next_u64(self, n: int) -> np.ndarray:
        """Return the next ``n`` raw 64-bit outputs and advance by ``n``."""
        if n < 0:
            raise ValueError("n must be non-negative")
        k = np.arange(self.position + 1, self.position + 1 + n, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.origin_seed) + k * np.uint64(GOLDEN_GAMMA)
            out = _mix64_array(z)
        self.position += n
        return out

    def uniform(self, n: int) -> np.ndarray:
        """``n`` uniforms on the open interval (0, 1).

        The top 52 bits of each output are centred in their cell,
        ``((u >> 12) + 0.5) * 2**-52``.  Every such value is exactly
        representable, the smallest being ``2**-53`` and the largest
        ``1 - 2**-53``, so 0 and 1 never occur and no draw is rejected.
        (With 53 bits the top cell centre would round up to 1.0.)
        """
        u = self.next_u64(n) >> np.uint64(12)
        return (u.astype(np.float64) + 0.5) * _TWO_POW_M52

    def standard_normal(self, n: int) -> np.ndarray:
        """``n`` standard normals via Box-Muller on consecutive uniform pairs.

        Consumes ``2 * ceil(n / 2)`` outputs; an odd request discards the
        sine half of the last pair.
        """
        if n == 0:
            return np.empty(0)
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log(u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.empty((pairs, 2))
        z[:, 0] = radius * np.cos(angle)
        z[:, 1] = radius * np.sin(angle)
        return z.ravel()[:n]


@dataclass(frozen=True)
class HalfCauchyParams:
    """Half-Cauchy with location 0 and peak width ``scale``."""

    scale: float = 1.0
    location: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"Half-Cauchy scale must be positive, got {self.scale}")
        if self.location != 0.0:
            raise ValueError("Half-Cauchy location is fixed at 0")


def seeded_stream(seed: int) -> RandomStream:
    return RandomStream(seed)


def child_seed(master: int, fold: int, run: int) -> int:
    """Derive the seed of job ``(fold, run)`` from a master seed.

    ``fold`` fills bits 16-31 and ``run`` bits 0-15 of a packed word, which is
    xored with the mixed master and mixed again.  For a fixed master the map
    is injective in ``(fold, run)`` because ``mix64`` is a bijection.
    """
    if not (0 <= fold < 1 << 16 and 0 <= run < 1 << 16):
        raise ValueError(f"fold and run must lie in [0, 65536), got {fold}, {run}")
    if not 0 <= int(master) <= MASK64:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master}")
    packed = (fold << 16) | run
    return mix64(mix64((int(master) + GOLDEN_GAMMA) & MASK64) ^ packed)


def sample_standard_normal(stream: RandomStream, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    return stream.standard_normal(n)


def half_cauchy_from_uniform(u, scale: float = 1.0):
    """Inverse CDF of the Half-Cauchy: ``scale * tan(pi * u / 2)``."""
    return scale * np.tan(0.5 * np.pi * np.asarray(u, dtype=np.float64))


def sample_half_cauchy(stream: RandomStream, params: HalfCauchyParams = HalfCauchyParams(),
                       size: int | None = None):
    """Draw from Half-Cauchy(0, scale); one output per draw.

    Returns a float when ``size`` is None, else an array of ``size`` draws.
    """
    if size is None:
        return float(half_cauchy_from_uniform(stream.uniform(1)[0], params.scale))
    return half_cauchy_from_uniform(stream.uniform(size), params.scale)
