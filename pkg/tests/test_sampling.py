import numpy as np
import pytest

from spinorcheck.grassmann import GeneratorPool
from spinorcheck.sampling import BOSONIC, FERMIONIC, sample_random, stream
from spinorcheck.tensor import slots


def test_same_seed_same_sample():
    a = sample_random(slots("t^ i^"), BOSONIC, stream(7, 3, "W"))
    b = sample_random(slots("t^ i^"), BOSONIC, stream(7, 3, "W"))
    assert np.array_equal(a.data, b.data)


def test_streams_differ_by_index_and_label():
    base = sample_random(slots("t^"), BOSONIC, stream(7, 0, "W")).data
    assert not np.allclose(base, sample_random(slots("t^"), BOSONIC, stream(7, 1, "W")).data)
    assert not np.allclose(base, sample_random(slots("t^"), BOSONIC, stream(7, 0, "phi")).data)


def test_fermionic_one_generator_per_entry():
    pool = GeneratorPool()
    t = sample_random(slots("s^ i_"), FERMIONIC, stream(1), pool)
    assert t.degree == 1 and pool.count == 4
    masks = [set(t.entry(idx).terms) for idx in np.ndindex(2, 2)]
    assert all(len(m) == 1 for m in masks)
    assert len(set().union(*masks)) == 4


def test_pool_shared_between_samples():
    pool = GeneratorPool()
    sample_random(slots("s^"), FERMIONIC, stream(1), pool)
    second = sample_random(slots("s^"), FERMIONIC, stream(2), pool)
    assert pool.count == 4
    assert set().union(*(second.entry((i,)).terms for i in range(2))) == {1 << 2, 1 << 3}


def test_integer_seed_accepted():
    a = sample_random(slots("u^"), BOSONIC, 5)
    assert a.shape == (1,)


def test_unknown_statistics_rejected():
    with pytest.raises(ValueError):
        sample_random(slots("s^"), "anyonic", stream(0))
