"""Typed multi-index tensors over graded scalars.

Storage layout: a tensor of Grassmann degree ``k`` keeps its entries as a dense
complex array of shape ``slot_dims + (n_gen,) * k``.  The trailing generator
axes are *ordered*: entry ``[..., g1, ..., gk]`` is the coefficient of the
product ``theta_g1 ... theta_gk`` in that order.  Products of tensors simply
concatenate generator axes in factor order, so the anticommutation signs are
recovered at the very end by antisymmetrising (see :func:`antisymmetrize`).
Bosonic tensors are the ``k = 0`` case.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .grassmann import GrassmannElement, sort_sign

UP = "up"
DOWN = "down"


class Species(enum.Enum):
    SPACETIME = ("spacetime", 4)
    SPINOR = ("spinor", 2)
    DOTTED = ("spinor-dotted", 2)
    ISOSPIN = ("isospin", 2)
    UNIT = ("unit-line", 1)

    @property
    def label(self) -> str:
        return self.value[0]

    @property
    def dim(self) -> int:
        return self.value[1]

    @classmethod
    def parse(cls, name: str) -> "Species":
        for s in cls:
            if name in (s.label, s.name.lower()):
                return s
        raise ValueError(f"unknown index species {name!r}")


@dataclass(frozen=True)
class Slot:
    species: Species
    variance: str

    def __post_init__(self):
        if self.variance not in (UP, DOWN):
            raise ValueError(f"variance must be 'up' or 'down', got {self.variance!r}")

    @property
    def dim(self) -> int:
        return self.species.dim

    def flipped(self) -> "Slot":
        return Slot(self.species, DOWN if self.variance == UP else UP)

    def __str__(self):
        return f"{self.species.label}/{self.variance}"


def slots(spec: str) -> tuple[Slot, ...]:
    """Compact slot constructor: ``slots("t_ i^ i_")``.

    Letters: t spacetime, s spinor, d dotted spinor, i isospin, u unit-line;
    suffix ``^`` for up, ``_`` for down.
    """
    table = {"t": Species.SPACETIME, "s": Species.SPINOR, "d": Species.DOTTED,
             "i": Species.ISOSPIN, "u": Species.UNIT}
    out = []
    for tok in spec.split():
        out.append(Slot(table[tok[0]], UP if tok[1] == "^" else DOWN))
    return tuple(out)


class ContractionError(ValueError):
    """Raised when two slots cannot be paired."""


class ParityError(ValueError):
    pass


class ShapeError(ValueError):
    pass


# -- antisymmetrisation -------------------------------------------------------


@lru_cache(maxsize=None)
def _combos(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), k)), dtype=np.intp).reshape(-1, k)


@lru_cache(maxsize=None)
def _signed_perms(k: int) -> tuple:
    out = []
    for p in itertools.permutations(range(k)):
        inv = sum(1 for i, j in itertools.combinations(range(k), 2) if p[i] > p[j])
        out.append((p, -1 if inv & 1 else 1))
    return tuple(out)


def antisymmetrize(data: np.ndarray, degree: int, absolute: bool = False) -> np.ndarray:
    """Collapse ``degree`` ordered generator axes onto sorted generator subsets.

    Returns an array of shape ``data.shape[:-degree] + (C(n, degree),)`` whose
    last axis follows ``itertools.combinations`` order.  With ``absolute`` the
    magnitudes are summed instead (a pre-cancellation bound).
    """
    if degree == 0:
        return (np.abs(data) if absolute else data)[..., None]
    n = data.shape[-1]
    lead = data.ndim - degree
    combos = _combos(n, degree)
    if combos.size == 0:
        return np.zeros(data.shape[:lead] + (0,), dtype=complex)
    total = np.zeros(data.shape[:lead] + (len(combos),), dtype=float if absolute else complex)
    for perm, sign in _signed_perms(degree):
        # entry at ordered axes (g_perm[0], ...) for each sorted subset g
        picked = data[(Ellipsis,) + tuple(combos[:, p] for p in perm)]
        total += np.abs(picked) if absolute else sign * picked
    return total


# -- the tensor type ----------------------------------------------------------


class Tensor:
    """Dense tensor with typed slots and homogeneous Grassmann degree."""

    __slots__ = ("slots", "data", "degree", "scale_weight")

    def __init__(self, slots_: Sequence[Slot], data, degree: int = 0, scale_weight=Fraction(0)):
        self.slots = tuple(slots_)
        self.data = np.asarray(data, dtype=complex)
        self.degree = int(degree)
        self.scale_weight = Fraction(scale_weight)
        dims = tuple(s.dim for s in self.slots)
        expect = self.data.ndim
        if expect != len(dims) + self.degree or self.data.shape[: len(dims)] != dims:
            raise ShapeError(f"data shape {self.data.shape} does not fit slots {dims} with degree {self.degree}")
        if self.degree and len(set(self.data.shape[len(dims):])) > 1:
            raise ShapeError("generator axes must share one length")

    # construction helpers
    @classmethod
    def from_elements(cls, slots_: Sequence[Slot], elements, n_gen: int | None = None) -> "Tensor":
        """Build from an array of :class:`GrassmannElement` of uniform degree."""
        elements = np.asarray(elements, dtype=object)
        degrees = set()
        top = 0
        for e in elements.flat:
            e = e if isinstance(e, GrassmannElement) else GrassmannElement.scalar(e)
            for k in e.terms:
                degrees.add(bin(k).count("1"))
                top = max(top, k.bit_length())
        if len(degrees) > 1:
            raise ParityError(f"entries mix Grassmann degrees {sorted(degrees)}")
        degree = degrees.pop() if degrees else 0
        n = max(n_gen or 0, top) if degree else 0
        data = np.zeros(elements.shape + (n,) * degree, dtype=complex)
        for idx, e in np.ndenumerate(elements):
            e = e if isinstance(e, GrassmannElement) else GrassmannElement.scalar(e)
            for k, v in e.terms.items():
                gens = tuple(i for i in range(k.bit_length()) if k >> i & 1)
                data[idx + gens] = v
        return cls(slots_, data, degree)

    @property
    def parity(self) -> str:
        return "odd" if self.degree % 2 else "even"

    @property
    def rank(self) -> int:
        return len(self.slots)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.slots)

    @property
    def n_gen(self) -> int:
        return self.data.shape[-1] if self.degree else 0

    def with_generators(self, n: int) -> "Tensor":
        """Zero-pad generator axes to length ``n``."""
        if not self.degree or self.n_gen == n:
            return self
        if n < self.n_gen:
            raise ShapeError("cannot shrink the generator pool")
        pad = [(0, 0)] * self.rank + [(0, n - self.n_gen)] * self.degree
        return Tensor(self.slots, np.pad(self.data, pad), self.degree, self.scale_weight)

    def entry(self, index) -> GrassmannElement:
        index = tuple(index)
        if not self.degree:
            return GrassmannElement.scalar(self.data[index])
        out = GrassmannElement()
        sub = self.data[index]
        for gens in zip(*np.nonzero(sub)):
            out = out + GrassmannElement.monomial(gens, sub[gens])
        return out

    def elements(self) -> np.ndarray:
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(*self.shape):
            out[idx] = self.entry(idx)
        return out

    def coefficients(self) -> np.ndarray:
        """Entries as coefficient vectors over sorted generator subsets."""
        return antisymmetrize(self.data, self.degree)

    def magnitude(self) -> np.ndarray:
        """Per-entry pre-cancellation magnitude of the generator coefficients."""
        return antisymmetrize(self.data, self.degree, absolute=True)

    def scalar(self):
        """Value of a rank-0 tensor: complex if bosonic, else GrassmannElement."""
        if self.rank:
            raise ShapeError("scalar() needs a rank-0 tensor")
        if not self.degree:
            return complex(self.data)
        return self.entry(())

    def max_abs(self) -> float:
        c = self.coefficients()
        return float(np.max(np.abs(c))) if c.size else 0.0

    # algebra
    def _check_compatible(self, other: "Tensor"):
        if self.slots != other.slots or self.degree != other.degree:
            raise ShapeError("tensors differ in slots or degree")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._check_compatible(other)
        n = max(self.n_gen, other.n_gen)
        a, b = self.with_generators(n), other.with_generators(n)
        return Tensor(self.slots, a.data + b.data, self.degree, self.scale_weight)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + (-1) * other

    def __mul__(self, c) -> "Tensor":
        if isinstance(c, Tensor):
            return graded_product([self, c])
        return Tensor(self.slots, self.data * c, self.degree, self.scale_weight)

    __rmul__ = __mul__

    def transpose(self, perm: Sequence[int]) -> "Tensor":
        perm = tuple(perm)
        axes = perm + tuple(range(self.rank, self.rank + self.degree))
        return Tensor([self.slots[p] for p in perm], np.transpose(self.data, axes), self.degree, self.scale_weight)

    def conjugate(self, generator_map: Sequence[int] | None = None) -> "Tensor":
        """Entrywise conjugate; slot types follow the Hermitian identifications.

        Spinor and dotted-spinor slots swap; isospin slots flip variance through
        the (orthonormal) Hermitian metric; spacetime slots stay put because the
        Pauli frame is real.  ``generator_map`` is the conjugation involution on
        generator indices (default: all generators real).
        """
        new = []
        for s in self.slots:
            if s.species is Species.SPINOR:
                new.append(Slot(Species.DOTTED, s.variance))
            elif s.species is Species.DOTTED:
                new.append(Slot(Species.SPINOR, s.variance))
            elif s.species is Species.ISOSPIN:
                new.append(s.flipped())
            else:
                new.append(s)
        data = np.conj(self.data)
        if generator_map is not None and self.degree:
            perm = np.asarray(generator_map, dtype=np.intp)
            if len(perm) != self.n_gen:
                raise ShapeError("generator map length differs from the generator count")
            for ax in range(self.rank, self.rank + self.degree):
                data = np.take(data, perm, axis=ax)
        if self.degree > 1:
            lead = tuple(range(self.rank))
            data = np.transpose(data, lead + tuple(range(self.data.ndim - 1, self.rank - 1, -1)))
        return Tensor(new, data, self.degree, self.scale_weight)

    def abs(self) -> "Tensor":
        return Tensor(self.slots, np.abs(self.data), self.degree, self.scale_weight)

    def __repr__(self):
        return f"Tensor([{', '.join(map(str, self.slots))}], degree={self.degree}, n_gen={self.n_gen})"


# -- operations ---------------------------------------------------------------


def check_pair(a: Slot, b: Slot, where: str = "") -> None:
    if a.species is not b.species or a.variance == b.variance:
        raise ContractionError(f"cannot contract {a} with {b}{where}: need equal species and opposite variance")


def contract(t: Tensor, i: int, j: int) -> Tensor:
    """Sum over one up/down slot pair of ``t``."""
    check_pair(t.slots[i], t.slots[j], f" (slots {i} and {j})")
    data = np.trace(t.data, axis1=i, axis2=j)
    rest = [s for k, s in enumerate(t.slots) if k not in (i, j)]
    return Tensor(rest, data, t.degree, t.scale_weight)


def graded_product(factors: Sequence[Tensor]) -> Tensor:
    """Tensor product in the given factor order; slots and generator axes concatenate."""
    factors = list(factors)
    if not factors:
        return Tensor((), np.array(1.0 + 0j))
    n = max(f.n_gen for f in factors)
    factors = [f.with_generators(n) for f in factors]
    operands = []
    slot_labels, gen_labels = [], []
    label = 0
    for f in factors:
        s = list(range(label, label + f.rank))
        label += f.rank
        g = list(range(label, label + f.degree))
        label += f.degree
        operands += [f.data, s + g]
        slot_labels += s
        gen_labels += g
    data = np.einsum(*operands, slot_labels + gen_labels)
    return Tensor([s for f in factors for s in f.slots], data, sum(f.degree for f in factors),
                  sum((f.scale_weight for f in factors), Fraction(0)))


def einsum_graded(subscripts: str, *tensors: Tensor, magnitude: bool = False) -> Tensor:
    """Typed Einstein summation keeping generator axes in operand order.

    ``subscripts`` uses one character per slot, comma separated, with an
    optional ``->out``.  Every repeated character must join an up slot with a
    down slot of the same species.  With ``magnitude=True`` the absolute values
    of all operands are summed, giving the pre-cancellation size of the sum.
    """
    if "->" in subscripts:
        lhs, out = subscripts.split("->")
    else:
        lhs, out = subscripts, None
    terms = lhs.split(",")
    if len(terms) != len(tensors):
        raise ShapeError(f"{len(terms)} subscript groups for {len(tensors)} tensors")
    seen: dict[str, list[Slot]] = {}
    for term, t in zip(terms, tensors):
        if len(term) != t.rank:
            raise ShapeError(f"subscript {term!r} has {len(term)} letters for a rank-{t.rank} tensor")
        for ch, s in zip(term, t.slots):
            seen.setdefault(ch, []).append(s)
    for ch, ss in seen.items():
        if len(ss) > 2:
            raise ContractionError(f"index {ch!r} appears {len(ss)} times")
        if len(ss) == 2:
            check_pair(ss[0], ss[1], f" (index {ch!r})")
    if out is None:
        out = "".join(ch for ch in dict.fromkeys(lhs.replace(",", "")) if len(seen[ch]) == 1)
    for ch in out:
        if len(seen.get(ch, ())) != 1:
            raise ContractionError(f"output index {ch!r} must appear exactly once in the inputs")

    n = max((t.n_gen for t in tensors), default=0)
    ids = {ch: k for k, ch in enumerate(seen)}
    nxt = len(ids)
    operands, gen_out = [], []
    for term, t in zip(terms, tensors):
        t = t.with_generators(n)
        g = list(range(nxt, nxt + t.degree))
        nxt += t.degree
        operands += [np.abs(t.data) if magnitude else t.data, [ids[c] for c in term] + g]
        gen_out += g
    data = np.einsum(*operands, [ids[c] for c in out] + gen_out, optimize=len(tensors) > 2)
    out_slots = [seen[c][0] for c in out]
    return Tensor(out_slots, data, sum(t.degree for t in tensors),
                  sum((t.scale_weight for t in tensors), Fraction(0)))


# -- fixed objects ------------------------------------------------------------

#: Minkowski signature used throughout (Pauli frame Gram matrix)
METRIC_SIGNATURE = (1, -1, -1, -1)

#: canonical symplectic matrix; eps_{01} = +1 and eps^{01} = +1 so that sharp∘flat = id
EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])


def metric(variance: str = UP) -> Tensor:
    s = Slot(Species.SPACETIME, variance)
    return Tensor((s, s), np.diag(np.array(METRIC_SIGNATURE, dtype=float)))


def epsilon(species: Species, variance: str, phase: complex = 1.0) -> Tensor:
    """Normalized symplectic form; the lower form carries ``phase``, the upper its inverse.

    With ``eps_{AB} = phase * E`` the raising form is ``conj(phase) * E`` which
    makes ``eps^{AC} eps_{BC} = delta^A_B`` for any unit phase.
    """
    if species not in (Species.SPINOR, Species.DOTTED, Species.ISOSPIN):
        raise ValueError(f"no symplectic form on {species.label}")
    phase = complex(phase)
    factor = phase if variance == DOWN else np.conj(phase)
    s = Slot(species, variance)
    return Tensor((s, s), factor * EPS)


def delta(species: Species) -> Tensor:
    return Tensor((Slot(species, UP), Slot(species, DOWN)), np.eye(species.dim))


def combinations_count(n: int, k: int) -> int:
    return math.comb(n, k)


__all__ = [
    "UP", "DOWN", "Species", "Slot", "slots", "Tensor", "contract", "graded_product", "einsum_graded",
    "antisymmetrize", "metric", "epsilon", "delta", "EPS", "METRIC_SIGNATURE", "ContractionError",
    "ParityError", "ShapeError", "sort_sign",
]
