"""Deterministic random streams.

All randomness in the package flows through counter-based Philox
generators keyed by explicit integer seeds, so any run can be
reproduced bit for bit and parallel workers never share state.
Gaussian variates are produced by an explicit Box-Muller transform on
Philox uniforms rather than the generator's own normal method, which
keeps the draw sequence independent of the numpy version's sampler.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def mix_seed(*parts: int) -> int:
    """Mix integer parts into a single 64-bit seed (splitmix64 chain).

    Used to derive independent child streams, e.g. one per grid cell
    and trial, from a master seed.  Deterministic and order-sensitive.
    """
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (int(p) & _MASK64)) * 0xBF58476D1CE4E5B9 & _MASK64
        h ^= h >> 27
        h = h * 0x94D049BB133111EB & _MASK64
        h ^= h >> 31
    return h


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for the given seed."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal array via Box-Muller on Philox uniforms."""
    n = int(np.prod(shape))
    m = (n + 1) // 2
    # u1 in (0, 1] so the log is finite
    u1 = 1.0 - rng.random(m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    z = np.concatenate([r * np.cos(ang), r * np.sin(ang)])[:n]
    return z.reshape(shape)
