"""Graded scalars: complex numbers extended by a finite pool of Grassmann generators.

An element is stored as a map from generator bitmask to complex coefficient.
The bitmask always denotes the product of its generators in ascending order,
so any reordering sign is folded into the coefficient at construction time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

#: absolute guard used by :func:`near_zero` when the supplied scale is tiny
ZERO_FLOOR = 1e-30


def _popcount(x: int) -> int:
    return bin(x).count("1")


def merge_sign(a: int, b: int) -> int:
    """Sign from reordering (ascending generators of a)(ascending generators of b)."""
    swaps = 0
    while b:
        low = b & -b
        # every generator of `a` above this one of `b` must be passed
        swaps += _popcount(a & ~((low << 1) - 1))
        b ^= low
    return -1 if swaps & 1 else 1


def sort_sign(gens: Iterable[int]) -> tuple[int, int]:
    """Return (mask, sign) for the ordered product of the listed generators.

    A repeated generator makes the product vanish; sign 0 is returned then.
    """
    gens = list(gens)
    if len(set(gens)) != len(gens):
        return 0, 0
    inversions = sum(1 for i, j in itertools.combinations(range(len(gens)), 2) if gens[i] > gens[j])
    mask = 0
    for g in gens:
        mask |= 1 << g
    return mask, (-1 if inversions & 1 else 1)


class GrassmannElement:
    """Element of a finite Grassmann algebra with complex coefficients.

    >>> t1, t2 = GrassmannElement.generator(0), GrassmannElement.generator(1)
    >>> (t2 * t1).terms == {0b11: -1}
    True
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, complex] | None = None):
        self.terms: dict[int, complex] = {int(k): complex(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def scalar(cls, z: complex) -> "GrassmannElement":
        return cls({0: z})

    @classmethod
    def generator(cls, index: int, coeff: complex = 1.0) -> "GrassmannElement":
        return cls({1 << index: coeff})

    @classmethod
    def monomial(cls, gens: Iterable[int], coeff: complex = 1.0) -> "GrassmannElement":
        """Product ``coeff * theta_g1 * theta_g2 * ...`` in the given order."""
        mask, sign = sort_sign(int(g) for g in gens)
        return cls({mask: sign * coeff} if sign else {})

    @property
    def parity(self) -> str:
        degrees = {_popcount(k) & 1 for k in self.terms}
        if not degrees or degrees == {0}:
            return "even"
        if degrees == {1}:
            return "odd"
        return "mixed"

    @property
    def body(self) -> complex:
        return self.terms.get(0, 0j)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0j) + v
        return GrassmannElement(out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return GrassmannElement({k: v * other for k, v in self.terms.items()})
        other = _coerce(other)
        out: dict[int, complex] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                if ka & kb:
                    continue
                key = ka | kb
                out[key] = out.get(key, 0j) + merge_sign(ka, kb) * va * vb
        return GrassmannElement(out)

    def __rmul__(self, other):
        # scalars commute with everything
        return self * other

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).terms == {}

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def conjugate(self) -> "GrassmannElement":
        return grassmann_conjugate(self)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def __repr__(self):
        if not self.terms:
            return "G(0)"
        parts = []
        for k in sorted(self.terms, key=lambda m: (_popcount(m), m)):
            gens = [str(i + 1) for i in range(k.bit_length()) if k >> i & 1]
            parts.append(f"{self.terms[k]:.6g}" + ("·θ" + "θ".join(gens) if gens else ""))
        return "G(" + " + ".join(parts) + ")"


def _coerce(x) -> GrassmannElement:
    if isinstance(x, GrassmannElement):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return GrassmannElement.scalar(complex(x))
    raise TypeError(f"cannot treat {type(x).__name__} as a graded scalar")


def grassmann_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    return _coerce(a) * _coerce(b)


def grassmann_conjugate(a: GrassmannElement, generator_map=None) -> GrassmannElement:
    """Complex-conjugate the coefficients and reverse every generator product.

    ``generator_map`` sends each generator index to its conjugate (default:
    generators are real).  Reversing k generators costs (-1)^(k(k-1)/2).
    """
    out = GrassmannElement()
    for k, v in _coerce(a).terms.items():
        gens = [i for i in range(k.bit_length()) if k >> i & 1]
        if generator_map is not None:
            gens = [generator_map[i] for i in gens]
        out = out + GrassmannElement.monomial(reversed(gens), np.conj(v))
    return out


def near_zero(a, scale: float, tol: float) -> bool:
    """True iff every stored coefficient is within ``tol * max(scale, floor)``."""
    a = _coerce(a)
    return a.max_abs() <= tol * max(scale, ZERO_FLOOR)


@dataclass
class GeneratorPool:
    """Hands out fresh generator indices for one evaluation run."""

    count: int = 0
    _labels: list = field(default_factory=list, repr=False)
    _partner: dict = field(default_factory=dict, repr=False)

    def allocate(self, n: int, label: str = "") -> list[int]:
        start = self.count
        self.count += n
        self._labels.extend([label] * n)
        return list(range(start, start + n))

    def allocate_conjugates(self, gens: list[int], label: str = "") -> list[int]:
        """Fresh generators serving as the complex conjugates of ``gens``."""
        new = self.allocate(len(gens), label)
        for a, b in zip(gens, new):
            self._partner[a] = b
            self._partner[b] = a
        return new

    def involution(self) -> list[int]:
        """Conjugation on generator indices; unpaired generators are real."""
        return [self._partner.get(i, i) for i in range(self.count)]

    def label(self, index: int) -> str:
        return self._labels[index]
