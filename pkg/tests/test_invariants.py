import numpy as np
import pytest

from oracles import as_element, i_family_loops, loop_sum, rel_diff
from spinorcheck.invariants import (eighteen_schemes, eval_18_family, eval_I_family, eval_J_family,
                                    eval_mixed_PhiOmega, eval_phi4_traces, eval_S_family, eval_Sprime_family,
                                    identity_residual, m_exchange, mixed_schemes, phi4_epsilon_routes,
                                    sample_gauge_higgs, sample_omega, sample_Phi, threeleg_schemes)
from spinorcheck.sampling import BOSONIC, FERMIONIC
from spinorcheck.tensor import DOWN, UP, ParityError, Species, Tensor, epsilon, metric, slots

M = 1.3


def test_I_family_matches_loops():
    for i in range(3):
        b = sample_gauge_higgs(11, i)
        fast = [x.scalar() for x in eval_I_family(b["W"], b["phi"], b["phibar"])]
        slow = i_family_loops(b["W"], b["phi"], b["phibar"])
        for f, s in zip(fast, slow):
            assert abs(f - s) <= 1e-12 * max(abs(s), 1.0)


def test_I_family_zero_field():
    b = sample_gauge_higgs(1, 0)
    zero = Tensor(b["W"].slots, np.zeros((4, 2, 2)))
    assert all(x.scalar() == 0 for x in eval_I_family(zero, b["phi"], b["phibar"]))


def test_J_family_independent_of_isospin_phase():
    b = sample_gauge_higgs(2, 0)
    ref = [x.scalar() for x in eval_J_family(b["W"], b["phi"], b["phibar"])]
    turned = [x.scalar() for x in eval_J_family(b["W"], b["phi"], b["phibar"], eps_phase=np.exp(0.9j))]
    assert np.allclose(ref, turned, rtol=1e-12)


@pytest.mark.parametrize("stat", [BOSONIC, FERMIONIC])
def test_S_family_matches_loops(stat):
    b = sample_omega(4, 0, stat)
    o, ob = b["Omega"], b["OmegaBar"]
    g = metric(UP)
    lo, up = epsilon(Species.ISOSPIN, DOWN), epsilon(Species.ISOSPIN, UP)
    fast = eval_S_family(o, ob, M, stat)
    m4 = M ** 4
    s1 = loop_sum("lm,nr,la,ma,nb,rb", g, g, ob, o, ob, o) * m4
    s4 = loop_sum("lm,nr,ax,by,la,mb,nx,ry", g, g, up, lo, ob, o, ob, o) * m4
    assert rel_diff(as_element(fast[0]), s1) < 1e-12
    assert rel_diff(as_element(fast[3]), s4) < 1e-12


def test_eighteen_first_scheme_matches_loops():
    b = sample_omega(5, 0, FERMIONIC, shape="spinor")
    o, ob = b["Omega"], b["OmegaBar"]
    first, _ = eval_18_family(o, ob, M, FERMIONIC)
    assert str(eighteen_schemes()[0]) == "eps^(AB) eps^(CD) eps^(A'B') eps^(C'D')"
    es, ed = epsilon(Species.SPINOR, UP), epsilon(Species.DOTTED, UP)
    slow = loop_sum("aAE,aBF,bCG,bDH,AB,CD,EF,GH", ob, o, ob, o, es, es, ed, ed) * M ** 4
    assert rel_diff(as_element(first[0]), slow) < 1e-12


def test_scheme_counts():
    assert len(eighteen_schemes()) == 9
    assert len(mixed_schemes()) == 9
    assert len(threeleg_schemes()) == 9


@pytest.mark.parametrize("stat", [BOSONIC, FERMIONIC])
def test_statistics_mismatch_raises(stat):
    other = FERMIONIC if stat == BOSONIC else BOSONIC
    b = sample_omega(6, 0, stat)
    with pytest.raises(ParityError):
        eval_S_family(b["Omega"], b["OmegaBar"], M, other)


def test_fermionic_conjugate_uses_fresh_generators():
    b = sample_omega(7, 0, FERMIONIC)
    o, ob = b["Omega"], b["OmegaBar"]
    assert o.n_gen == ob.n_gen == 16
    gens_o = set().union(*(o.entry(i).terms for i in np.ndindex(4, 2)))
    gens_b = set().union(*(ob.entry(i).terms for i in np.ndindex(4, 2)))
    assert not gens_o & gens_b


@pytest.mark.parametrize("stat,sign", [(BOSONIC, 1), (FERMIONIC, -1)])
def test_m_exchange_sign(stat, sign):
    b = sample_omega(8, 0, stat)
    for crossed, traced in m_exchange(b["Omega"], b["OmegaBar"], M, [(0, 1, 2, 3), (1, 1, 0, 2)]):
        res, scale = identity_residual([crossed, traced], [1, -sign])
        assert res <= 1e-12 * scale


@pytest.mark.parametrize("stat", [BOSONIC, FERMIONIC])
def test_sprime_relation(stat):
    b = sample_omega(9, 0, stat)
    h = sample_gauge_higgs(9, 0)
    vals = eval_Sprime_family(b["Omega"], b["OmegaBar"], h["phi"], h["phibar"], M, stat)
    res, scale = identity_residual(vals, [-1, 1, 1])
    assert res <= 1e-12 * scale


def test_phi4_routes_agree():
    p = sample_Phi(3, 0)
    for eps_route, trace_route in phi4_epsilon_routes(p["Phi"], p["PhiBar"], np.exp(0.4j)):
        assert np.allclose(eps_route.data, trace_route.data, atol=1e-12)


def test_phi4_first_trace_is_square():
    p = sample_Phi(3, 1)
    first = eval_phi4_traces(p["Phi"], p["PhiBar"])[0].scalar()
    t = np.einsum("aee,aff->", p["Phi"].data, p["PhiBar"].data)
    assert np.isclose(first, t * t)


def test_mixed_family_shape_and_zero_field():
    p = sample_Phi(4, 0)
    b = sample_omega(4, 0, BOSONIC, shape="spinor")
    zero = Tensor(b["Omega"].slots, np.zeros((2, 2, 2)))
    out = eval_mixed_PhiOmega(p["Phi"], p["PhiBar"], zero, b["OmegaBar"], BOSONIC)
    assert [len(x) for x in out] == [9, 9, 9]
    assert all(v.scalar() == 0 for row in out for v in row)


def test_sample_slots():
    b = sample_omega(1, 0, BOSONIC, shape="spinor")
    assert b["Omega"].slots == slots("i^ s_ d_")
    assert b["OmegaBar"].slots == slots("i_ s_ d_")


def test_J_members_lie_in_I_span():
    # eps_{ac} eps^{xz} = delta delta - delta delta turns every J into an I combination
    rows_i, rows_j = [], []
    for i in range(12):
        b = sample_gauge_higgs(13, i)
        vi = [x.scalar() for x in eval_I_family(b["W"], b["phi"], b["phibar"])]
        vj = [x.scalar() for x in eval_J_family(b["W"], b["phi"], b["phibar"])]
        rows_i += [np.real(vi), np.imag(vi)]
        rows_j += [np.real(vj), np.imag(vj)]
    a, bj = np.array(rows_i), np.array(rows_j)
    coef, *_ = np.linalg.lstsq(a, bj, rcond=None)
    assert np.allclose(a @ coef, bj, atol=1e-10 * np.abs(bj).max())
    assert np.linalg.matrix_rank(np.hstack([a, bj]), tol=1e-9 * np.abs(a).max()) == 3


def test_second_eighteen_member_five_vanishes_for_commuting_fields():
    for i in range(3):
        b = sample_omega(14, i, BOSONIC, shape="spinor")
        _, second = eval_18_family(b["Omega"], b["OmegaBar"], M, BOSONIC)
        _, mags = eval_18_family(b["Omega"], b["OmegaBar"], M, BOSONIC, magnitude=True)
        assert abs(second[4].scalar()) <= 1e-14 * abs(mags[4].scalar())
        assert abs(mags[4].scalar()) > 0.1
