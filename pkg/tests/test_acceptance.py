"""Acceptance criteria 1-11 on the full configuration (seed 42, 100 samples, both statistics).

Each test prints one ``criterion N: PASS|FAIL`` line; the lines are repeated in
the terminal summary so they survive output capture.
"""
import numpy as np
import pytest

from spinorcheck.sampling import BOSONIC, FERMIONIC
from spinorcheck.suite import SuiteConfig, mutation_sweep, run_identity_suite, vanishing_controls

VERDICTS = {}
FULL = SuiteConfig(seed=42, samples=100)


def verdict(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def report():
    return run_identity_suite(FULL)


def _checks(report, names, stats=None):
    out = []
    for c in report.checks:
        if c.name in names and (stats is None or c.statistics in stats):
            out.append(c)
    missing = set(names) - {c.name for c in out}
    assert not missing, f"checks not run: {sorted(missing)}"
    return out


def _all_pass(checks):
    bad = [f"{c.name}[{c.statistics}]={c.max_rel_residual:.2e}" for c in checks if c.passed is not True]
    worst = max(c.max_rel_residual for c in checks)
    return not bad, f"worst residual {worst:.2e}" + (f"; failing {bad}" if bad else "")


def test_criterion_01_clifford(report):
    c = report.check("clifford_relation")
    verdict(1, c.passed and c.tol == 1e-12, f"{c.max_rel_residual:.2e} <= 1e-12 over 100 Hermitian pairs")


def test_criterion_02_dirac_signature(report):
    c = report.check("dirac_form_signature")
    verdict(2, c.passed is True, "two positive and two negative eigenvalues")


def test_criterion_03_tau(report):
    checks = _checks(report, {"tau_unit_norm", "tau_eigen_positive", "tau_eigen_negative"})
    ok, detail = _all_pass(checks)
    ok = ok and report.check("tau_unit_norm").tol <= 1e-10
    verdict(3, ok, detail)


def test_criterion_04_qed(report):
    checks = _checks(report, {"qed_vertex_two_routes", "qed_vertex_kernel"})
    ok, detail = _all_pass(checks)
    ok = ok and report.check("qed_vertex_two_routes").tol <= 1e-12 and report.check("qed_vertex_kernel").tol <= 1e-10
    verdict(4, ok, detail)


def test_criterion_05_gauge_replacement(report):
    abelian = report.check("curvature_abelian_replacement")
    nonabelian = report.check("curvature_nonabelian_replacement")
    ok = abelian.passed is True and nonabelian.passed is None and np.isfinite(nonabelian.max_rel_residual)
    verdict(5, ok, f"abelian {abelian.max_rel_residual:.2e} (rounding only); "
                   f"non-abelian reported {nonabelian.max_rel_residual:.3g}")


def test_criterion_06_covariant_derivative_and_vertices(report):
    names = {"covariant_derivative_two_routes", "vertices_higgs-kinetic", "vertices_higgs-potential",
             "vertices_yukawa", "vertices_higgs-kinetic_complete", "vertices_higgs-potential_complete",
             "vertices_yukawa_complete"}
    checks = _checks(report, names)
    ok, detail = _all_pass(checks)
    verdict(6, ok and all(c.tol <= 1e-8 for c in checks), detail)


IDENTITY_CHECKS = {
    BOSONIC: {"I_cayley_hamilton", "J_relation", "S_S1_S3_S4", "S_S5_vanishes", "S_crossed", "Sprime_relation",
              "T18_first_sum", "T18_second_sum", "phi4_eps_route_bar_00", "phi4_eps_route_plain_00",
              "phi4_isospin_symplectic_1", "phi4_isospin_symplectic_2", "phi4_isospin_symplectic_3",
              "phi4_isospin_symplectic_4"},
    FERMIONIC: {"S_S1_S3_S4", "S_2S2_S5", "S_crossed", "Sprime_relation", "T18_first_sum", "T18_second_sum"},
}


def test_criterion_07_identity_suite(report):
    checks = []
    for stat, names in IDENTITY_CHECKS.items():
        checks += _checks(report, names, {stat})
    # every family identity in the report, including the per-entry route comparisons
    family = [c for c in report.checks if c.statistics in (BOSONIC, FERMIONIC) and c.tol == 1e-10]
    ok, detail = _all_pass(checks + family)
    verdict(7, ok, f"{len(family)} family checks, " + detail)


def test_criterion_08_relation_discovery(report):
    dims = {(r.family, r.statistics): r.basis for r in report.relations}
    i_basis, j_basis, ij_basis = dims[("I", BOSONIC)], dims[("J", BOSONIC)], dims[("IJ", BOSONIC)]
    i_ok = i_basis.nullspace_dim == 1 and i_basis.contains([2, -2, 1, -1])
    j_ok = j_basis.nullspace_dim == 1 and j_basis.contains([1, -2, 2])
    ij_ok = ij_basis.nullspace_dim == 2
    verdict(8, i_ok and j_ok and ij_ok,
            f"I dim {i_basis.nullspace_dim} {i_basis.as_lists()}; J dim {j_basis.nullspace_dim} "
            f"{j_basis.as_lists()}; joined I+J dim {ij_basis.nullspace_dim} (required 2)")


def test_criterion_09_assembled_potential(report):
    checks = _checks(report, {"Sprime_potential"})
    ok, detail = _all_pass(checks)
    verdict(9, ok and len(checks) == 2, detail)


def test_criterion_10_mutation_sensitivity():
    sweep = mutation_sweep(FULL, samples=20)
    controls = vanishing_controls(FULL, samples=20)
    weak = [f"{name}:{label}[{stat}]={ratio:.2e}" for name, label, stat, ratio in sweep if ratio < 0.1]
    weak += [f"{name}={ratio:.2e}" for name, ratio in controls.items() if ratio < 0.1]
    lowest = min(r for *_, r in sweep)
    mutated = run_identity_suite(SuiteConfig(seed=42, samples=5, suite="I",
                                             mutation=("I_cayley_hamilton", "I1")))
    end_to_end = not mutated.passed
    verdict(10, not weak and end_to_end,
            f"{len(sweep)} coefficients + {len(controls)} vanishing controls; lowest ratio {lowest:.2e}"
            + (f"; below 0.1: {weak}" if weak else ""))


def test_criterion_11_determinism(report):
    again = run_identity_suite(FULL)
    same = report.to_json(include_timings=False) == again.to_json(include_timings=False)
    verdict(11, same, "two full runs, identical reports without timings")
