import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinorcheck.grassmann import (GeneratorPool, GrassmannElement, grassmann_conjugate, grassmann_mul,
                                   merge_sign, near_zero, sort_sign)

G = GrassmannElement


def t(i):
    return G.generator(i)


def test_generator_nilpotent():
    assert (t(0) * t(0)).is_zero()


def test_anticommutation():
    assert (t(0) * t(1)).terms == {0b11: 1}
    assert (t(1) * t(0)).terms == {0b11: -1}


def test_mixed_expansion():
    a = G({0: 2, 0b1: 3})
    b = G({0: 1, 0b10: 1})
    assert grassmann_mul(a, b) == G({0: 2, 0b1: 3, 0b10: 2, 0b11: 3})


def test_parity_tags():
    assert t(0).parity == "odd"
    assert (t(0) * t(1)).parity == "even"
    assert G.scalar(3).parity == "even"
    assert (t(0) + t(0) * t(1)).parity == "mixed"


def test_sort_sign_repeated_generator_vanishes():
    assert sort_sign([2, 1, 2]) == (0, 0)
    assert sort_sign([2, 0, 1]) == (0b111, 1)
    assert sort_sign([1, 0]) == (0b11, -1)


def test_merge_sign_matches_sort_sign():
    for a_gens in itertools.combinations(range(5), 2):
        for b_gens in itertools.combinations(range(5), 2):
            if set(a_gens) & set(b_gens):
                continue
            a = sum(1 << g for g in a_gens)
            b = sum(1 << g for g in b_gens)
            assert merge_sign(a, b) == sort_sign(list(a_gens) + list(b_gens))[1]


def test_conjugate_body():
    assert grassmann_conjugate(G.scalar(1j)) == G.scalar(-1j)


def test_conjugate_reverses_pair():
    assert grassmann_conjugate(t(0) * t(1)) == t(1) * t(0)
    assert grassmann_conjugate(t(0) * t(1)) == -(t(0) * t(1))


def test_conjugate_involution():
    assert grassmann_conjugate(grassmann_conjugate(t(0))) == t(0)


def test_conjugate_with_partner_generators():
    # theta_0 <-> theta_3, etc.
    partner = [3, 4, 5, 0, 1, 2]
    x = G.monomial([0, 1, 2], 2j)
    y = grassmann_conjugate(x, partner)
    assert y == G.monomial([5, 4, 3], -2j)
    assert grassmann_conjugate(y, partner) == x


def test_near_zero():
    assert near_zero(G(), 1.0, 1e-10)
    assert near_zero(G.monomial([0, 1, 2, 3], 1e-16), 1.0, 1e-10)
    assert not near_zero(G.scalar(0.5), 1.0, 1e-10)


def test_pool_allocation_and_pairing():
    pool = GeneratorPool()
    a = pool.allocate(3, "omega")
    b = pool.allocate_conjugates(a, "omega-bar")
    assert a == [0, 1, 2] and b == [3, 4, 5]
    assert pool.involution() == [3, 4, 5, 0, 1, 2]
    assert pool.label(4) == "omega-bar"


def test_adjacent_transpositions_flip_sign():
    gens = [t(i) for i in range(4)]
    ref = gens[0] * gens[1] * gens[2] * gens[3]
    for k in range(3):
        order = list(range(4))
        order[k], order[k + 1] = order[k + 1], order[k]
        prod = G.scalar(1)
        for i in order:
            prod = prod * gens[i]
        assert prod == -ref


def test_block_swap_of_odd_pairs():
    a, b, c, d = (t(i) for i in range(4))
    assert a * b * c * d == c * d * a * b


def test_five_odd_from_four_generators_vanish():
    rng = np.random.default_rng(1)
    odd = [G({1 << g: complex(*rng.normal(size=2)) for g in range(4)}) for _ in range(5)]
    prod = G.scalar(1)
    for x in odd:
        prod = prod * x
    assert prod.is_zero()


def test_coercion_rejects_strings():
    with pytest.raises(TypeError):
        G.scalar(1) + "x"


coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
elements = st.dictionaries(st.integers(0, 15), coeff, max_size=6).map(G)


def _close(a, b, tol=1e-12):
    scale = max(a.max_abs(), b.max_abs(), 1.0)
    return (a - b).max_abs() <= tol * scale * 100


@settings(max_examples=60, deadline=None)
@given(elements, elements, elements)
def test_associative(a, b, c):
    assert _close((a * b) * c, a * (b * c))


@settings(max_examples=60, deadline=None)
@given(elements, elements, elements)
def test_distributive(a, b, c):
    assert _close(a * (b + c), a * b + a * c)


@settings(max_examples=60, deadline=None)
@given(elements, elements)
def test_conjugate_reverses_products(a, b):
    assert _close(grassmann_conjugate(a * b), grassmann_conjugate(b) * grassmann_conjugate(a))
