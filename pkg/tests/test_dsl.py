import string
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import as_element, i_family_loops, loop_sum, rel_diff
from spinorcheck.dsl import (STRATEGIES, ExpressionError, default_symbols, evaluate_expression, evaluate_plan,
                             format_expression, parse_expression, plan_contraction)
from spinorcheck.invariants import sample_gauge_higgs, sample_omega
from spinorcheck.sampling import FERMIONIC
from spinorcheck.tensor import UP, ParityError, ShapeError, Tensor, metric, slots

TABLE = default_symbols()
FIRST = "g^{lm} W_l^a_b W_m^c_a phi^b phibar_c"


def test_parse_single_term():
    e = parse_expression(FIRST, TABLE)
    assert len(e.terms) == 1
    assert [f.symbol for f in e.terms[0].factors] == ["g", "W", "W", "phi", "phibar"]
    assert e.terms[0].factors[1].indices == ("l", "a", "b")
    assert e.terms[0].coefficient == 1


def test_parse_coefficients_and_signs():
    e = parse_expression("3/2 phi^a phibar_a - 2 phi^b phibar_b", TABLE)
    assert [t.coefficient for t in e.terms] == [Fraction(3, 2), Fraction(-2)]


def test_parse_free_indices():
    e = parse_expression("W_l^a_b phi^b -> l a", TABLE)
    assert e.free == ("l", "a")


def test_zero_expression():
    assert parse_expression("0", TABLE).terms == ()


@pytest.mark.parametrize("text,offset,fragment", [
    ("g^{lm} W_l^a_b W_m^c_a phi^b", 19, "appears once"),
    ("foo^a", 0, "unknown symbol"),
    ("g^{lm} W_l^a_b W_m^c_a phi^b phibar_c phibar_c", 45, "3 times"),
    ("1/0 phi^a phibar_a", 0, "zero denominator"),
    ("phi^a phibar_a +", 16, "at least one factor"),
    ("phi^a $", 6, "unexpected character"),
])
def test_error_offsets(text, offset, fragment):
    with pytest.raises(ExpressionError) as info:
        parse_expression(text, TABLE)
    assert info.value.offset == offset
    assert fragment in str(info.value)


def test_error_on_wrong_index_count():
    with pytest.raises(ExpressionError, match="takes 3 indices"):
        parse_expression("W_l^a phi^a", TABLE)


def test_error_on_species_clash():
    with pytest.raises(ExpressionError, match="used as"):
        parse_expression("g^{ab} phi^a phibar_b", TABLE)


def test_error_on_same_variance_pair():
    with pytest.raises(ExpressionError, match="same variance"):
        parse_expression("phi^a phi^a", TABLE)


def test_offsets_are_bytes():
    # the non-ASCII character sits after a two-byte prefix offset
    with pytest.raises(ExpressionError) as info:
        parse_expression("phi^a phibar_a é", TABLE)
    assert info.value.offset == len("phi^a phibar_a ".encode())


_TEMPLATES = [
    "g^{{{0}{1}}} W_{0}^{2}_{3} W_{1}^{4}_{2} phi^{3} phibar_{4}",
    "g^{{{0}{1}}} W_{0}^{2}_{2} W_{1}^{3}_{3} phi^{4} phibar_{4}",
    "phi^{2} phibar_{2} phi^{3} phibar_{3}",
    "epsup^{{{2}{3}}} eps_{{{4}{5}}} phi^{4} phi^{5} phibar_{2} phibar_{3}",
]


@st.composite
def expressions(draw):
    n = draw(st.integers(1, 3))
    parts = []
    for k in range(n):
        num = draw(st.integers(-9, 9).filter(bool))
        den = draw(st.integers(1, 5))
        # separate letter pool per term: a letter keeps one species across the expression
        letters = draw(st.permutations(list(string.ascii_lowercase[8 * k:8 * k + 8])))
        body = draw(st.sampled_from(_TEMPLATES)).format(*letters[:6])
        coeff = Fraction(num, den)
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        text = f"{mag.numerator}/{mag.denominator} {body}" if mag.denominator != 1 else f"{mag.numerator} {body}"
        parts.append((sign, text))
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return " ".join([head] + [f"{s} {t}" for s, t in parts[1:]])


@settings(max_examples=60, deadline=None)
@given(expressions())
def test_format_roundtrip(text):
    e = parse_expression(text, TABLE)
    again = parse_expression(format_expression(e, TABLE), TABLE)
    assert again == e


def test_evaluation_matches_loop_oracle():
    e = parse_expression(FIRST, TABLE)
    for i in range(3):
        b = sample_gauge_higgs(21, i)
        want = i_family_loops(b["W"], b["phi"], b["phibar"])[0]
        for strategy in STRATEGIES:
            got = evaluate_plan(plan_contraction(e, strategy), {**b, "g": metric(UP)}, TABLE).scalar()
            assert abs(got - want) <= 1e-12 * max(abs(want), 1.0)


def test_fermionic_evaluation_matches_loop_oracle():
    table = default_symbols(FERMIONIC)
    e = parse_expression("g^{lm} Omegabar_{l a} Omega_m^a g^{nr} Omegabar_{n b} Omega_r^b", table)
    b = sample_omega(3, 0, FERMIONIC)
    o, ob = b["Omega"], b["OmegaBar"]
    slow = loop_sum("lm,la,ma,nr,nb,rb", metric(UP), ob, o, metric(UP), ob, o)
    for strategy in STRATEGIES:
        got = evaluate_expression(e, {"g": metric(UP), "Omega": o, "Omegabar": ob}, table, strategy)
        assert rel_diff(as_element(got), slow) < 1e-12


def test_optimal_plan_never_costs_more_than_naive():
    for text in [FIRST, "epsup^{ab} eps_{cd} phi^c phi^d phibar_a phibar_b",
                 "g^{lm} g^{nr} W_l^a_b W_m^b_c W_n^c_d W_r^d_a"]:
        e = parse_expression(text, TABLE)
        best = plan_contraction(e, "optimal").total_flops
        assert best <= plan_contraction(e, "left").total_flops
        assert best <= plan_contraction(e, "right").total_flops
        assert best <= plan_contraction(e, "greedy").total_flops


def test_free_index_result():
    b = sample_gauge_higgs(5, 0)
    e = parse_expression("W_l^a_b phi^b -> l a", TABLE)
    got = evaluate_expression(e, b, TABLE)
    assert got.slots == slots("t_ i^")
    assert np.allclose(got.data, np.einsum("lab,b->la", b["W"].data, b["phi"].data))


def test_empty_sum_is_zero():
    assert evaluate_expression(parse_expression("0", TABLE), {}, TABLE).scalar() == 0


def test_conjugate_binding_defaults_to_conjugate():
    b = sample_gauge_higgs(6, 0)
    e = parse_expression("phi^a phibar_a", TABLE)
    got = evaluate_expression(e, {"phi": b["phi"]}, TABLE).scalar()
    assert np.isclose(got, np.vdot(b["phi"].data, b["phi"].data))


def test_missing_binding():
    with pytest.raises(KeyError):
        evaluate_expression(parse_expression("phi^a phibar_a", TABLE), {}, TABLE)


def test_shape_mismatch():
    bad = {"phi": Tensor(slots("s^"), np.ones(2))}
    with pytest.raises(ShapeError):
        evaluate_expression(parse_expression("phi^a phibar_a", TABLE), bad, TABLE)


def test_parity_mismatch():
    b = sample_omega(2, 0, FERMIONIC)
    e = parse_expression("g^{lm} Omegabar_{l a} Omega_m^a", TABLE)
    with pytest.raises(ParityError):
        evaluate_expression(e, {"g": metric(UP), "Omega": b["Omega"], "Omegabar": b["OmegaBar"]}, TABLE)


def test_unknown_strategy():
    with pytest.raises(ValueError):
        plan_contraction(parse_expression(FIRST, TABLE), "random")
