import csv

import numpy as np
import pytest
import sympy as sp

from spinorcheck.ew import EWParams
from spinorcheck.vertices import (TERMS, c, extract_vertices, lam, m, monomial_tags, q, s, symbolic_expansion,
                                  validate_table)


def _only(table, legs):
    entries = table.lookup(legs)
    assert len(entries) == 1
    return entries[0]


def test_hzz_vertex():
    e = _only(symbolic_expansion("higgs-kinetic"), ("H", "Z", "Z"))
    assert sp.simplify(e.coefficient - m * q ** 2 / (2 * c ** 2)) == 0
    assert e.structure == "g(Z,Z)"


def test_quartic_higgs_vertex():
    e = _only(symbolic_expansion("higgs-potential"), ("H",) * 4)
    assert e.coefficient == -lam


def test_potential_constant_term():
    assert _only(symbolic_expansion("higgs-potential"), ()).coefficient == lam * m ** 4


def test_w_mass_term():
    e = _only(symbolic_expansion("higgs-kinetic"), ("W_minus", "W_plus"))
    assert sp.simplify(e.coefficient - m ** 2 * q ** 2 / 2) == 0


def test_charged_mixing_simplifies_with_pythagoras():
    e = _only(symbolic_expansion("higgs-kinetic"), ("W_minus", "Z", "phi_plus"))
    reduced = sp.simplify(e.coefficient.subs(c, sp.sqrt(1 - s ** 2)))
    expected = sp.sqrt(2) * m * q ** 2 * s ** 2 / (2 * sp.sqrt(1 - s ** 2))
    assert sp.simplify(reduced - expected) == 0


@pytest.mark.parametrize("term", TERMS)
def test_tables_validate_numerically(term):
    report = validate_table(symbolic_expansion(term), EWParams(theta=0.37, q=0.8, m=1.4, lam=0.21), seed=3)
    assert report.max_rel_error < 1e-8
    assert report.missing == []


def test_unknown_term():
    with pytest.raises((KeyError, ValueError)):
        extract_vertices("gauge-kinetic")


def test_monomial_tags():
    num, den, tags = monomial_tags(-sp.sqrt(2) * m * q ** 2 / (4 * c))
    assert (num, den) == (-1, 4)
    assert tags == "cos^-1 m^1 q^2 sqrt2^1"


def test_csv_export(tmp_path):
    out = tmp_path / "v.csv"
    extract_vertices("higgs-potential").to_csv(out)
    rows = list(csv.DictReader(out.open()))
    assert {r["legs"] for r in rows} >= {"H H H H", ""}
    assert set(rows[0]) == {"legs", "coefficient-numerator", "coefficient-denominator",
                            "trig-power tags", "index-structure tag"}


def test_numeric_value_of_entry():
    p = EWParams(q=0.5, theta=0.3, m=2.0)
    e = _only(symbolic_expansion("higgs-kinetic"), ("H", "Z", "Z"))
    assert np.isclose(e.numeric(p), p.m * p.q ** 2 / (2 * np.cos(p.theta) ** 2))
