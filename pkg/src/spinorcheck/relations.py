"""Numerical discovery of linear relations among families of scalars."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grassmann import GrassmannElement
from .tensor import Tensor, _combos

#: singular values below RANK_TOL * sigma_max count as null
RANK_TOL = 1e-8
#: integer-pattern acceptance after rescaling
INTEGER_TOL = 1e-6


class DegenerateSamplingError(RuntimeError):
    pass


@dataclass
class RelationBasis:
    labels: list[str]
    matrix: np.ndarray
    basis: list[np.ndarray]
    singular_values: np.ndarray
    rank_tol: float
    integer: list[bool] = field(default_factory=list)

    @property
    def nullspace_dim(self) -> int:
        return len(self.basis)

    def span_residual(self, vec) -> float:
        """Relative distance of ``vec`` from the discovered nullspace."""
        vec = np.asarray(vec, dtype=float)
        if not self.basis:
            return 1.0
        q, _ = np.linalg.qr(np.array(self.basis).T)
        proj = q @ (q.T @ vec)
        return float(np.linalg.norm(vec - proj) / max(np.linalg.norm(vec), 1e-300))

    def contains(self, vec, tol: float = 1e-6) -> bool:
        return self.span_residual(vec) <= tol

    def as_lists(self) -> list[list[float]]:
        return [[_clean(x) for x in v] for v in self.basis]


def _clean(x: float):
    r = round(x)
    return int(r) if abs(x - r) < INTEGER_TOL else float(x)


def coefficient_map(value) -> dict[int, complex]:
    """Graded scalar as {generator mask: coefficient}."""
    if isinstance(value, GrassmannElement):
        return dict(value.terms)
    if isinstance(value, Tensor):
        if value.rank:
            raise ValueError("relation members must be scalars")
        if not value.degree:
            return {0: complex(value.data)}
        coeffs = value.coefficients()
        combos = _combos(value.n_gen, value.degree)
        masks = (1 << combos).sum(axis=1)
        return {int(m): complex(c) for m, c in zip(masks, coeffs) if c != 0}
    return {0: complex(value)}


def canonical_basis(null: np.ndarray, zero: float = 1e-9) -> list[np.ndarray]:
    """Reduced row echelon form of the nullspace rows, each rescaled to small integers if possible."""
    a = np.array(null, dtype=float)
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) < zero:
            continue
        a[[r, p]] = a[[p, r]]
        a[r] /= a[r, c]
        for k in range(rows):
            if k != r:
                a[k] -= a[k, c] * a[r]
        r += 1
    out = []
    for v in a[:r]:
        v = np.where(np.abs(v) < zero, 0.0, v)
        nz = np.abs(v[v != 0])
        w = v / nz.min()
        first = w[np.nonzero(w)[0][0]]
        w = w * np.sign(first)
        out.append(w)
    return out


def is_integer_vector(v: np.ndarray) -> bool:
    return bool(np.all(np.abs(v - np.round(v)) <= INTEGER_TOL))


def relation_matrix(values: Sequence[Sequence]) -> np.ndarray:
    """Real matrix with one row per (sample, coefficient slot, re/im), one column per member."""
    blocks = []
    for sample in values:
        maps = [coefficient_map(v) for v in sample]
        keys = sorted(set().union(*maps))
        if not keys:
            continue
        block = np.array([[m.get(k, 0j) for m in maps] for k in keys])
        norm = np.max(np.abs(block))
        if norm == 0:
            continue
        block = block / norm
        blocks += [block.real, block.imag]
    if not blocks:
        return np.zeros((0, len(values[0]) if values else 0))
    return np.vstack(blocks)


def nullspace(matrix: np.ndarray, rank_tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    _, s, vh = np.linalg.svd(matrix, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rank_tol * smax))
    return vh[rank:], s


def find_linear_relations(family, sampler: Callable[[int, int], object], samples: int = 100, seed: int = 0,
                          tol: float = RANK_TOL, labels: Sequence[str] | None = None) -> RelationBasis:
    """Nullspace of the samples-by-members matrix of a scalar family.

    ``family`` is either a list of callables ``binding -> scalar`` or a single
    callable returning the whole list.  ``sampler(seed, index)`` produces the
    binding for one sample.
    """
    if callable(family):
        evaluate = family
    else:
        members = list(family)
        if not members:
            raise ValueError("empty family")
        evaluate = lambda b: [f(b) for f in members]  # noqa: E731
    values = [list(evaluate(sampler(seed, i))) for i in range(samples)]
    n = len(values[0])
    if n == 0:
        raise ValueError("empty family")
    labels = list(labels) if labels is not None else [f"f{i + 1}" for i in range(n)]
    mat = relation_matrix(values)
    if mat.shape[0] == 0 or not np.any(mat):
        raise DegenerateSamplingError("every sampled value vanished; retry with a different seed")
    null, s = nullspace(mat, tol)
    basis = canonical_basis(null) if len(null) else []
    return RelationBasis(labels, mat, basis, s, tol, [is_integer_vector(v) for v in basis])
