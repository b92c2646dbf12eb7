"""Deterministic random sampling of bosonic and fermionic tensors.

Every sample draws from its own counter-based stream keyed by
``(seed, stream label, sample index)``, so serial and parallel runs see the
same values.
"""
from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np

from .grassmann import GeneratorPool
from .tensor import Slot, Tensor

BOSONIC = "bosonic"
FERMIONIC = "fermionic"
STATISTICS = (BOSONIC, FERMIONIC)


def stream(seed: int, index: int = 0, label: str = "") -> np.random.Generator:
    """Philox stream for one sample; keys never overlap between samples."""
    tag = zlib.crc32(label.encode()) & 0xFFFFFFFF
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, (tag << 32) | (index & 0xFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_random(slots_: Sequence[Slot], statistics: str, rng, pool: GeneratorPool | None = None) -> Tensor:
    """Random tensor with the given slots.

    Bosonic entries are standard complex Gaussians.  Fermionic entries are
    ``c_i * theta_i`` with one fresh generator per entry taken from ``pool``.
    ``rng`` may be a Generator or an integer seed.
    """
    if not isinstance(rng, np.random.Generator):
        rng = stream(int(rng))
    shape = tuple(s.dim for s in slots_)
    coeffs = complex_gaussian(rng, shape)
    if statistics == BOSONIC:
        return Tensor(slots_, coeffs)
    if statistics != FERMIONIC:
        raise ValueError(f"statistics must be one of {STATISTICS}, got {statistics!r}")
    pool = pool if pool is not None else GeneratorPool()
    size = int(np.prod(shape)) if shape else 1
    gens = pool.allocate(size, label="sample")
    data = np.zeros(shape + (pool.count,), dtype=complex)
    flat = data.reshape(size, pool.count)
    flat[np.arange(size), gens] = coeffs.reshape(size)
    return Tensor(slots_, data, degree=1)
