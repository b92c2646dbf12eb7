import numpy as np
import pytest

from spinorcheck.relations import DegenerateSamplingError, canonical_basis, find_linear_relations
from spinorcheck.sampling import stream


def _point(seed, i):
    return stream(seed, i).standard_normal(2)


def test_pythagorean_relation():
    fam = [lambda p: p[0] ** 2, lambda p: p[1] ** 2, lambda p: p[0] ** 2 + p[1] ** 2]
    basis = find_linear_relations(fam, _point, samples=20, seed=1)
    assert basis.nullspace_dim == 1
    assert basis.as_lists() == [[1, 1, -1]]
    assert basis.integer == [True]


def test_independent_family_has_no_relation():
    fam = [lambda p: p[0], lambda p: p[1], lambda p: p[0] * p[1]]
    assert find_linear_relations(fam, _point, samples=20, seed=1).nullspace_dim == 0


def test_all_zero_family_is_degenerate():
    with pytest.raises(DegenerateSamplingError):
        find_linear_relations([lambda p: 0.0, lambda p: 0.0], _point, samples=5)


def test_span_residual():
    fam = [lambda p: p[0], lambda p: 2 * p[0], lambda p: p[1]]
    basis = find_linear_relations(fam, _point, samples=10, seed=2)
    assert basis.contains([2, -1, 0])
    assert not basis.contains([0, 0, 1])


def test_canonical_basis_is_basis_independent():
    a = np.array([[1.0, 1.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]])
    mix = np.array([[0.3, 0.7], [-1.2, 0.4]]) @ a
    assert np.allclose(canonical_basis(a), canonical_basis(mix))
