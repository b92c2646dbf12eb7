"""Identity suite: runs every registered check on seeded samples and assembles a report."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import __version__
from . import ew, invariants as inv, spinors as sp
from .relations import RelationBasis, coefficient_map, find_linear_relations
from .sampling import BOSONIC, FERMIONIC, STATISTICS, stream
from .tensor import METRIC_SIGNATURE, Tensor, einsum_graded, slots
from .vertices import TERMS, symbolic_expansion, validate_table

SUITES = ("all", "qed", "geometry", "ew", "I", "J", "S", "Sprime", "T18", "phi4", "mixed")
NA = "n/a"


@dataclass
class SuiteConfig:
    seed: int = 42
    samples: int = 100
    statistics: tuple[str, ...] = STATISTICS
    tol: float = 1e-10
    suite: str = "all"
    #: statistics whose identities are asserted (default: the sampled statistics)
    assume: str | None = None
    #: (identity name, member label): add +1 to that coefficient
    mutation: tuple[str, str] | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}")
        for s in self.statistics:
            if s not in STATISTICS:
                raise ValueError(f"unknown statistics {s!r}")
        if self.assume is not None and self.assume not in STATISTICS:
            raise ValueError(f"unknown statistics {self.assume!r}")
        if self.samples < 1:
            raise ValueError("need at least one sample")


@dataclass
class CheckResult:
    name: str
    statistics: str
    max_rel_residual: float
    tol: float
    passed: bool | None

    def as_json(self) -> dict:
        return {"name": self.name, "statistics": self.statistics,
                "max_rel_residual": float(self.max_rel_residual), "tol": float(self.tol), "pass": self.passed}


@dataclass
class RelationResult:
    family: str
    statistics: str
    basis: RelationBasis

    def as_json(self) -> dict:
        return {"family": self.family, "statistics": self.statistics,
                "nullspace_dim": self.basis.nullspace_dim, "basis": self.basis.as_lists()}


@dataclass
class IdentityReport:
    config: SuiteConfig
    checks: list[CheckResult] = field(default_factory=list)
    relations: list[RelationResult] = field(default_factory=list)
    resolved_signs: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.passed is False]

    def check(self, name: str, statistics: str | None = None) -> CheckResult:
        for c in self.checks:
            if c.name == name and (statistics is None or c.statistics == statistics):
                return c
        raise KeyError(name)

    def as_json(self, include_timings: bool = True) -> dict:
        doc = {
            "version": __version__,
            "conventions": {
                "epsilon_sign": "eps_01 = +1, eps^01 = +1",
                "metric_signature": list(METRIC_SIGNATURE),
                "conjugation": "conjugate coefficients, reverse generator order, theta_i -> theta_bar_i",
                "resolved_signs": self.resolved_signs,
            },
            "seed": self.config.seed,
            "samples": self.config.samples,
            "checks": [c.as_json() for c in self.checks],
            "relations": [r.as_json() for r in self.relations],
        }
        if include_timings:
            doc["timings"] = {k: round(v, 4) for k, v in self.timings.items()}
        return doc

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.as_json(include_timings), indent=2, sort_keys=True)


# -- helpers ----------------------------------------------------------------------------


def _rel(res: float, scale: float) -> float:
    if res == 0:
        return 0.0
    return float(res / scale) if scale > 0 else float("inf")


class _Tracker:
    """Running max of relative residuals for one named check."""

    def __init__(self):
        self.worst = 0.0

    def add(self, res: float, scale: float):
        self.worst = max(self.worst, _rel(res, scale))


def _hermitian(rng) -> sp.HVector:
    return sp.HVector.from_components(rng.normal(size=4))


def _spinor(rng) -> sp.DiracSpinor:
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    return sp.DiracSpinor.from_vector(v)


def _phase(rng) -> sp.EpsilonForm:
    return sp.EpsilonForm.from_angle(rng.uniform(0, 2 * np.pi))


# -- geometry and QED -------------------------------------------------------------------


def _geometry_checks(cfg: SuiteConfig, report: IdentityReport):
    n, seed = cfg.samples, cfg.seed
    cliff, metric_phase, gamma_phase, tau_norm = _Tracker(), _Tracker(), _Tracker(), _Tracker()
    tau_pos, tau_neg, tau_unique, shell, proj, antisym = (_Tracker() for _ in range(6))
    abelian, nonabelian = _Tracker(), _Tracker()
    complex_gap = np.inf
    for i in range(n):
        rng = stream(seed, i, "geometry")
        x, y = _hermitian(rng), _hermitian(rng)
        eps = _phase(rng)
        g = sp.lorentz_metric(eps)
        gx, gy = sp.gamma(x, eps), sp.gamma(y, eps)
        anti = gx @ gy + gy @ gx
        cliff.add(np.abs(anti - 2 * g(x, y) * np.eye(4)).max(),
                  np.abs(gx @ gy).max() + np.abs(gy @ gx).max() + 2 * abs(g(x, y)))
        g0 = sp.lorentz_metric()
        metric_phase.add(abs(g(x, y) - g0(x, y)), abs(g0(x, y)) + 1e-300)
        gamma_phase.add(np.abs(gx - sp.gamma(x)).max(), np.abs(gx).max())

        for sign, tracker in ((1, tau_pos), (-1, tau_neg)):
            psi = _spinor(rng)
            pair = sp.spinor_pairing(psi)
            angle = np.angle(pair) + (0 if sign > 0 else np.pi)
            psi = sp.DiracSpinor(psi.u, psi.lambda_bar * np.exp(1j * angle))
            tau = sp.tau_of(psi, eps)
            tau_norm.add(abs(g(tau, tau) - 1), 1.0)
            v = psi.vector()
            tracker.add(np.linalg.norm(sp.gamma(tau, eps) @ v - sign * v), np.linalg.norm(v))
            solved, _ = sp.solve_tau(psi, sign, eps)
            tau_unique.add(np.abs(solved.y - tau.y).max(), np.abs(tau.y).max())
            if sign > 0:
                m = rng.uniform(0.5, 2.0)
                p = m * np.diag(METRIC_SIGNATURE) @ tau.components().real
                plus, minus = sp.mass_shell_project(psi, p, m, eps)
                shell.add(np.linalg.norm(minus.vector()), np.linalg.norm(v))
                pp, pm = sp.projectors(p, m, eps)
                proj.add(np.abs(pp @ pp - pp).max() + np.abs(pp + pm - np.eye(4)).max(), np.abs(pp).max())
        psi = _spinor(rng)
        pair = sp.spinor_pairing(psi)
        if abs(np.sin(np.angle(pair))) > 0.1:
            tau = sp.tau_of(psi, eps)
            v = psi.vector()
            gv = sp.gamma(tau, eps) @ v
            complex_gap = min(complex_gap, min(np.linalg.norm(gv - v), np.linalg.norm(gv + v)) / np.linalg.norm(v))

        p = rng.normal(size=4)
        chi = rng.normal(size=3)
        alpha = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
        ab = sp.GaugeFieldLocal(alpha, np.zeros((3, 3, 3)))
        rho = sp.curvature_like(p, ab)
        abelian.add(np.abs(sp.gauge_replacement_residual(p, ab, chi)).max(), np.abs(rho).max())
        antisym.add(np.abs(rho + np.swapaxes(rho, 1, 2)).max(), np.abs(rho).max())
        nab = sp.GaugeFieldLocal(alpha, sp.su2_structure())
        nonabelian.add(np.abs(sp.gauge_replacement_residual(p, nab, chi)).max(),
                       np.abs(sp.curvature_like(p, nab)).max())

    eig = np.linalg.eigvalsh(sp.dirac_form_matrix())
    sig_ok = int(np.sum(eig > 0)) == 2 and int(np.sum(eig < 0)) == 2
    gram = sp.gram_matrix()
    gram_res = float(np.abs(gram - np.diag(METRIC_SIGNATURE)).max())
    adj_res = 0.0
    for i in range(min(n, 50)):
        psi = _spinor(stream(seed, i, "adjoint"))
        back = sp.dirac_adjoint(psi).adjoint()
        adj_res = max(adj_res, float(np.abs(back.vector() - psi.vector()).max()))

    add = report.checks.append
    add(CheckResult("clifford_relation", NA, cliff.worst, 1e-12, cliff.worst <= 1e-12))
    add(CheckResult("dirac_form_signature", NA, 0.0 if sig_ok else 1.0, 0.0, sig_ok))
    add(CheckResult("dirac_adjoint_involution", NA, adj_res, 1e-12, adj_res <= 1e-12))
    add(CheckResult("metric_pauli_gram", NA, gram_res, 1e-12, gram_res <= 1e-12))
    add(CheckResult("metric_phase_invariance", NA, metric_phase.worst, 1e-12, metric_phase.worst <= 1e-12))
    add(CheckResult("gamma_phase_invariance", NA, gamma_phase.worst, 1e-12, gamma_phase.worst <= 1e-12))
    add(CheckResult("tau_unit_norm", NA, tau_norm.worst, 1e-10, tau_norm.worst <= 1e-10))
    add(CheckResult("tau_eigen_positive", NA, tau_pos.worst, 1e-10, tau_pos.worst <= 1e-10))
    add(CheckResult("tau_eigen_negative", NA, tau_neg.worst, 1e-10, tau_neg.worst <= 1e-10))
    gap = 0.0 if not np.isfinite(complex_gap) else float(complex_gap)
    add(CheckResult("tau_complex_pairing_not_eigen", NA, gap, 1e-6, gap > 1e-6))
    add(CheckResult("tau_uniqueness", NA, tau_unique.worst, 1e-8, tau_unique.worst <= 1e-8))
    add(CheckResult("mass_shell_tau_plus", NA, shell.worst, 1e-12, shell.worst <= 1e-12))
    add(CheckResult("mass_shell_projectors", NA, proj.worst, 1e-12, proj.worst <= 1e-12))
    add(CheckResult("curvature_antisymmetry", NA, antisym.worst, 1e-15, antisym.worst <= 1e-15))
    add(CheckResult("curvature_abelian_replacement", NA, abelian.worst, 1e-14, abelian.worst <= 1e-14))
    add(CheckResult("curvature_nonabelian_replacement", NA, nonabelian.worst, 0.0, None))


def _qed_checks(cfg: SuiteConfig, report: IdentityReport):
    routes, kernel, zero = _Tracker(), _Tracker(), 0.0
    for i in range(cfg.samples):
        rng = stream(cfg.seed, i, "qed")
        eps = _phase(rng)
        psi, psi2 = _spinor(rng), _spinor(rng)
        a = sp.HVector(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        e = rng.uniform(0.1, 2.0)
        v1 = sp.qed_vertex(psi, a, psi2, e, eps)
        v2 = sp.qed_vertex_two_spinor(psi, a, psi2, e, eps)
        routes.add(abs(v1 - v2), abs(v1) + abs(v2))
        k = sp.vertex_kernel_vector(psi, psi2, eps)
        a_perp = sp.project_out(a, k, eps)
        scale = e * sp.SQRT2 * float(np.abs(a_perp.y).sum() * np.abs(k.y).sum())
        kernel.add(abs(sp.qed_vertex(psi, a_perp, psi2, e, eps)), scale)
        zero = max(zero, abs(sp.qed_vertex(psi, sp.HVector(np.zeros((2, 2))), psi2, e, eps)))
    add = report.checks.append
    add(CheckResult("qed_vertex_two_routes", NA, routes.worst, 1e-12, routes.worst <= 1e-12))
    add(CheckResult("qed_vertex_kernel", NA, kernel.worst, 1e-10, kernel.worst <= 1e-10))
    add(CheckResult("qed_vertex_zero_field", NA, zero, 0.0, zero == 0.0))


# -- electroweak --------------------------------------------------------------------------


def _random_params(rng) -> ew.EWParams:
    return ew.EWParams(q=rng.uniform(0.3, 1.0), theta=rng.uniform(0.2, 1.3),
                       m=rng.uniform(0.5, 2.0), lam=rng.uniform(0.1, 1.0))


def _ew_checks(cfg: SuiteConfig, report: IdentityReport):
    iota = ew.pauli_isospin_frame()
    comm = iota[1] @ iota[2] - iota[2] @ iota[1]
    comm_res = float(np.abs(comm - 2j * iota[3]).max())
    frames, roundtrip, right, nabla = _Tracker(), _Tracker(), _Tracker(), _Tracker()
    vac, stationary, split_conf, split_adj = _Tracker(), _Tracker(), _Tracker(), _Tracker()
    for i in range(cfg.samples):
        rng = stream(cfg.seed, i, "ew")
        params = _random_params(rng)
        frame = ew.broken_frame(params.theta)
        frames.add(np.abs(frame.matrices() - frame.pauli_forms()).max(), np.abs(frame.matrices()).max())
        fields = ew.EWFieldSet.random(rng)
        w = ew.recompose_gauge_field(fields, frame, params)
        back = ew.decompose_gauge_field(w, frame, params)
        got = np.array([back.A, back.Z, back.W_plus, back.W_minus])
        want = np.array([fields.A, fields.Z, fields.W_plus, fields.W_minus])
        roundtrip.add(np.abs(got - want).max(), np.abs(want).max())
        w0 = ew.iota_components(w, params)[:, 0]
        right.add(np.abs(ew.right_sector_field(w, params) - w0).max(), np.abs(w0).max())
        mom = ew.random_momenta(rng)
        f1 = ew.higgs_covariant_derivative(fields, mom, params, "formula")
        f2 = ew.higgs_covariant_derivative(fields, mom, params, "matrix")
        nabla.add(np.abs(f1 - f2).max(), max(np.abs(f1).max(), np.abs(f2).max()))
        up, down = ew.higgs_field_components(ew.EWFieldSet(), params)
        vac.add(abs(np.sum(up * down) - params.m ** 2) + abs(ew.higgs_potential(up, down, params) - params.lam * params.m ** 4),
                params.m ** 2 + params.lam * params.m ** 4)
        h = 1e-4 * params.m ** 2
        s0 = params.m ** 2
        deriv = (ew.potential_of_norm(s0 + h, params) - ew.potential_of_norm(s0 - h, params)) / (2 * h)
        stationary.add(abs(deriv), params.lam * params.m ** 2)
        h0 = np.array([[params.m], [0.0]])
        split = ew.vacuum_split(h0, np.eye(1), np.eye(2))
        split_conf.add(abs(split.mu2 - params.m ** 2) + split.conformal_residual * params.m ** 2, params.m ** 2)
        xi = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        xi = xi - xi.conj().T
        blocks = split.blocks(xi)
        split_adj.add(np.abs(split.adjoint(blocks[2]) + blocks[1]).max(), np.abs(xi).max())

    add = report.checks.append
    add(CheckResult("isospin_pauli_commutator", NA, comm_res, 1e-15, comm_res <= 1e-15))
    add(CheckResult("broken_frame_dual_forms", NA, frames.worst, 1e-12, frames.worst <= 1e-12))
    add(CheckResult("gauge_recompose_roundtrip", NA, roundtrip.worst, 1e-12, roundtrip.worst <= 1e-12))
    add(CheckResult("right_sector_identification", NA, right.worst, 1e-12, right.worst <= 1e-12))
    add(CheckResult("higgs_vacuum_values", NA, vac.worst, 1e-12, vac.worst <= 1e-12))
    add(CheckResult("higgs_potential_stationarity", NA, stationary.worst, 1e-6, stationary.worst < 1e-6))
    add(CheckResult("covariant_derivative_two_routes", NA, nabla.worst, 1e-12, nabla.worst <= 1e-12))
    add(CheckResult("vacuum_split_conformal", NA, split_conf.worst, 1e-12, split_conf.worst <= 1e-12))
    add(CheckResult("vacuum_split_adjoint_blocks", NA, split_adj.worst, 1e-12, split_adj.worst <= 1e-12))

    rng = stream(cfg.seed, 0, "vertices")
    params = _random_params(rng)
    for term in TERMS:
        result = validate_table(symbolic_expansion(term), params, seed=cfg.seed)
        add(CheckResult(f"vertices_{term}", NA, result.max_rel_error, 1e-8, result.max_rel_error <= 1e-8))
        add(CheckResult(f"vertices_{term}_complete", NA, result.completeness_residual, 1e-8,
                        not result.missing))
    _, kind = ew.potential_extremum(params)
    report.resolved_signs["higgs_potential_extremum_at_vacuum"] = kind


# -- invariant families -----------------------------------------------------------------------


@dataclass
class Identity:
    name: str
    coefficients: dict[str, float]
    statistics: tuple[str, ...]
    #: single-member vanishing claim, scaled by the member's pre-cancellation magnitude
    vanishing: bool = False


@dataclass
class Family:
    name: str
    suite: str
    statistics: tuple[str, ...]
    evaluate: Callable[[int, int, str], tuple[dict, dict]]
    identities: list[Identity]


def _labels(prefix: str, values: Iterable) -> dict:
    return {f"{prefix}{k + 1}": v for k, v in enumerate(values)}


def _family_I(seed, i, stat):
    b = inv.sample_gauge_higgs(seed, i)
    return _labels("I", inv.eval_I_family(b["W"], b["phi"], b["phibar"])), {}


def _family_J(seed, i, stat):
    b = inv.sample_gauge_higgs(seed, i)
    vals = _labels("J", inv.eval_J_family(b["W"], b["phi"], b["phibar"]))
    phase = inv.sample_phase(seed, i, "J-phase")
    rotated = inv.eval_J_family(b["W"], b["phi"], b["phibar"], eps_phase=phase)
    vals.update(_labels("Jrot", rotated))
    return vals, {}


MASS = 1.3
EXCHANGE_INDICES = ((0, 1, 2, 3), (1, 2, 3, 0), (0, 0, 1, 1), (2, 3, 1, 0))


def _family_S(seed, i, stat):
    b = inv.sample_omega(seed, i, stat)
    vals = _labels("S", inv.eval_S_family(b["Omega"], b["OmegaBar"], MASS, stat))
    vals["F"] = inv.s_crossed(b["Omega"], b["OmegaBar"], MASS, stat)
    s5 = inv.eval_S_family(b["Omega"], b["OmegaBar"], MASS, stat, magnitude=True)[4]
    pairs = inv.m_exchange(b["Omega"], b["OmegaBar"], MASS, EXCHANGE_INDICES)
    for k, (crossed, traced) in enumerate(pairs):
        vals[f"MM{k}"], vals[f"MMx{k}"] = crossed, traced
    return vals, {"S5": inv.magnitude_of(s5)}


def _family_Sprime(seed, i, stat):
    b = inv.sample_omega(seed, i, stat)
    h = inv.sample_gauge_higgs(seed, i)
    vals = _labels("Sp", inv.eval_Sprime_family(b["Omega"], b["OmegaBar"], h["phi"], h["phibar"], MASS, stat))
    lhs, rhs = inv.assembled_potential(b["Omega"], b["OmegaBar"], h["phi"], h["phibar"], MASS, stat)
    vals["V_sum"], vals["V_closed"] = lhs, rhs
    return vals, {}


def _family_T18(seed, i, stat):
    b = inv.sample_omega(seed, i, stat, "spinor")
    first, second = inv.eval_18_family(b["Omega"], b["OmegaBar"], 1.0, stat)
    vals = _labels("T", first)
    vals.update(_labels("U", second))
    mags = {}
    if stat == BOSONIC:
        _, second_mag = inv.eval_18_family(b["Omega"], b["OmegaBar"], 1.0, stat, magnitude=True)
        mags["U5"] = inv.magnitude_of(second_mag[4])
    return vals, mags


def _family_phi4(seed, i, stat):
    b = inv.sample_Phi(seed, i)
    vals = _labels("P", inv.eval_phi4_traces(b["Phi"], b["PhiBar"]))
    phase = inv.sample_phase(seed, i, "phi4-phase")
    for k, (eps_route, trace_route) in enumerate(inv.phi4_epsilon_routes(b["Phi"], b["PhiBar"], phase)):
        for a in range(2):
            for c in range(2):
                vals[f"eps{k}_{a}{c}"] = Tensor((), eps_route.data[a, c])
                vals[f"tr{k}_{a}{c}"] = Tensor((), trace_route.data[a, c])
    sym = inv.phi4_isospin_symplectic(b["Phi"], b["PhiBar"], phase)
    mags = inv.phi4_isospin_symplectic(b["Phi"], b["PhiBar"], phase, magnitude=True)
    vals.update(_labels("X", sym))
    return vals, {f"X{k + 1}": inv.magnitude_of(m) for k, m in enumerate(mags)}


def _family_registry() -> list[Family]:
    both = STATISTICS
    s_identities = [
        Identity("S_S1_S3_S4", {"S1": 1, "S3": -1, "S4": -1}, (BOSONIC,)),
        Identity("S_S1_S3_S4", {"S1": 1, "S3": 1, "S4": -1}, (FERMIONIC,)),
        Identity("S_S5_vanishes", {"S5": 1}, (BOSONIC,), vanishing=True),
        Identity("S_2S2_S5", {"S2": 2, "S5": -1}, (FERMIONIC,)),
        Identity("S_crossed", {"F": 1, "S4": 1}, (BOSONIC,)),
        Identity("S_crossed", {"F": 1, "S4": -1}, (FERMIONIC,)),
    ]
    for k in range(4):
        s_identities.append(Identity(f"S_M_exchange_{k}", {f"MM{k}": 1, f"MMx{k}": -1}, (BOSONIC,)))
        s_identities.append(Identity(f"S_M_exchange_{k}", {f"MM{k}": 1, f"MMx{k}": 1}, (FERMIONIC,)))
    phi4 = []
    for k in range(2):
        for a in range(2):
            for c in range(2):
                phi4.append(Identity(f"phi4_eps_route_{'bar' if k == 0 else 'plain'}_{a}{c}",
                                     {f"eps{k}_{a}{c}": 1, f"tr{k}_{a}{c}": -1}, both))
    phi4 += [Identity(f"phi4_isospin_symplectic_{k + 1}", {f"X{k + 1}": 1}, both, vanishing=True) for k in range(4)]
    return [
        Family("I", "I", (BOSONIC,), _family_I, [Identity("I_cayley_hamilton", {"I1": 2, "I2": -2, "I3": 1, "I4": -1}, both)]),
        Family("J", "J", (BOSONIC,), _family_J, [
            Identity("J_relation", {"J1": 1, "J2": -2, "J3": 2}, both)] + [
            Identity(f"J_phase_invariance_{k}", {f"J{k}": 1, f"Jrot{k}": -1}, both) for k in (1, 2, 3)]),
        Family("S", "S", both, _family_S, s_identities),
        Family("Sprime", "Sprime", both, _family_Sprime, [
            Identity("Sprime_relation", {"Sp1": -1, "Sp2": 1, "Sp3": 1}, both),
            Identity("Sprime_potential", {"V_sum": 1, "V_closed": -1}, both)]),
        Family("T18", "T18", both, _family_T18, [
            Identity("T18_first_sum", {f"T{k}": 1 for k in range(1, 10)}, both),
            Identity("T18_second_sum", {f"U{k}": 1 for k in range(1, 10)}, both),
            Identity("T18_second_member_5_vanishes", {"U5": 1}, (BOSONIC,), vanishing=True)]),
        Family("phi4", "phi4", (BOSONIC,), _family_phi4, phi4),
    ]


def _value_map(v) -> dict:
    return v if isinstance(v, dict) else coefficient_map(v)


def identity_residual(identity: Identity, values: dict, magnitudes: dict,
                      mutation: str | None = None) -> tuple[float, float]:
    """(max coefficient of the combination, scale) for one sample."""
    coeffs = dict(identity.coefficients)
    if mutation is not None:
        coeffs[mutation] = coeffs.get(mutation, 0) + 1
    maps = {k: _value_map(values[k]) for k in coeffs}
    total: dict = {}
    for k, c in coeffs.items():
        for key, val in maps[k].items():
            total[key] = total.get(key, 0) + c * val
    res = max((abs(v) for v in total.values()), default=0.0)
    if identity.vanishing:
        scale = sum(magnitudes[k] for k in coeffs)
    else:
        scale = sum(abs(c) * max((abs(v) for v in maps[k].values()), default=0.0) for k, c in coeffs.items())
    return res, scale


def _active_statistics(cfg: SuiteConfig, family: Family) -> list[str]:
    return [s for s in cfg.statistics if s in family.statistics or cfg.assume in family.statistics]


def _family_checks(cfg: SuiteConfig, report: IdentityReport, families: list[Family]):
    for fam in families:
        for stat in _active_statistics(cfg, fam):
            sample_stat = stat if stat in fam.statistics else fam.statistics[0]
            asserted = cfg.assume or stat
            idents = [idn for idn in fam.identities if asserted in idn.statistics]
            trackers = {idn.name: _Tracker() for idn in idents}
            for i in range(cfg.samples):
                try:
                    values, mags = fam.evaluate(cfg.seed, i, sample_stat)
                except Exception as exc:
                    raise RuntimeError(f"family {fam.name} ({sample_stat}), sample {i}: {exc}") from exc
                for idn in idents:
                    mut = None
                    if cfg.mutation and cfg.mutation[0] == idn.name:
                        mut = cfg.mutation[1]
                    trackers[idn.name].add(*identity_residual(idn, values, mags, mut))
            label = stat if len(fam.statistics) > 1 or cfg.assume else sample_stat
            for idn in idents:
                worst = trackers[idn.name].worst
                report.checks.append(CheckResult(idn.name, label, worst, cfg.tol, worst <= cfg.tol))


def resolve_signs(cfg: SuiteConfig, report: IdentityReport, samples: int = 5):
    """Test both signs of each statistics-dependent identity and record which one holds."""
    table = {
        "S1 (+/-) S3 - S4": lambda v, s: ({"S1": 1, "S3": s, "S4": -1}),
        "crossed = (+/-) S4": lambda v, s: ({"F": 1, "S4": -s}),
        "M M = (+/-) exchanged M M": lambda v, s: ({"MM1": 1, "MMx1": -s}),
    }
    out = {}
    for stat in STATISTICS:
        found = {}
        for name, build in table.items():
            hits = []
            for sign in (1, -1):
                worst = 0.0
                for i in range(samples):
                    vals, _ = _family_S(cfg.seed, i, stat)
                    res, scale = identity_residual(Identity(name, build(vals, sign), STATISTICS), vals, {})
                    worst = max(worst, _rel(res, scale))
                if worst <= cfg.tol:
                    hits.append("+" if sign > 0 else "-")
            found[name] = hits[0] if len(hits) == 1 else ("both" if hits else "none")
        out[stat] = found
    report.resolved_signs["S_family"] = out


# -- relations ------------------------------------------------------------------------------


EXPECTED_RELATIONS = {
    ("I", BOSONIC): [[2, -2, 1, -1]],
    ("J", BOSONIC): [[1, -2, 2]],
    ("IJ", BOSONIC): None,  # expected dimension 2, basis not stated
    ("S", BOSONIC): [[1, 0, -1, -1, 0], [0, 0, 0, 0, 1]],
    ("S", FERMIONIC): [[1, 0, 1, -1, 0], [0, 2, 0, 0, -1]],
}
EXPECTED_DIMS = {("I", BOSONIC): 1, ("J", BOSONIC): 1, ("IJ", BOSONIC): 2, ("S", BOSONIC): 2, ("S", FERMIONIC): 2}


def relation_family(name: str, stat: str):
    """(evaluator, sampler, labels) for the relation finder."""
    if name in ("I", "J", "IJ"):
        def ev(b):
            out = []
            if name in ("I", "IJ"):
                out += inv.eval_I_family(b["W"], b["phi"], b["phibar"])
            if name in ("J", "IJ"):
                out += inv.eval_J_family(b["W"], b["phi"], b["phibar"])
            return out
        labels = (["I1", "I2", "I3", "I4"] if name != "J" else []) + (["J1", "J2", "J3"] if name != "I" else [])
        return ev, inv.sample_gauge_higgs, labels
    if name == "S":
        return (lambda b: inv.eval_S_family(b["Omega"], b["OmegaBar"], MASS, stat),
                lambda s, i: inv.sample_omega(s, i, stat), [f"S{k}" for k in range(1, 6)])
    if name == "Sprime":
        def ev(b):
            return inv.eval_Sprime_family(b["Omega"], b["OmegaBar"], b["phi"], b["phibar"], MASS, stat)
        return ev, lambda s, i: {**inv.sample_omega(s, i, stat), **inv.sample_gauge_higgs(s, i)}, ["Sp1", "Sp2", "Sp3"]
    if name == "T18":
        def ev(b):
            first, second = inv.eval_18_family(b["Omega"], b["OmegaBar"], 1.0, stat)
            return first + second
        return (ev, lambda s, i: inv.sample_omega(s, i, stat, "spinor"),
                [f"T{k}" for k in range(1, 10)] + [f"U{k}" for k in range(1, 10)])
    if name == "phi4":
        return (lambda b: inv.eval_phi4_traces(b["Phi"], b["PhiBar"]), inv.sample_Phi, ["P1", "P2", "P3", "P4"])
    if name == "mixed":
        def ev(b):
            return [x for fam in inv.eval_mixed_PhiOmega(b["Phi"], b["PhiBar"], b["Omega"], b["OmegaBar"], stat)
                    for x in fam]
        return (ev, lambda s, i: {**inv.sample_omega(s, i, stat, "spinor"), **inv.sample_Phi(s, i)},
                [f"{f}{k}" for f in ("K", "L", "N") for k in range(1, 10)])
    raise ValueError(f"unknown family {name!r}")


RELATION_FAMILIES = ("I", "J", "IJ", "S", "Sprime", "T18", "phi4", "mixed")


def discover(name: str, stat: str, samples: int, seed: int) -> RelationBasis:
    ev, sampler, labels = relation_family(name, stat)
    return find_linear_relations(ev, sampler, samples=samples, seed=seed, labels=labels)


def _relation_check(report: IdentityReport, name: str, stat: str, basis: RelationBasis, asserted: str):
    key = (name, asserted)
    if key not in EXPECTED_DIMS:
        return
    expected = EXPECTED_RELATIONS[key] or []
    residual = max((basis.span_residual(v) for v in expected), default=0.0)
    ok = basis.nullspace_dim == EXPECTED_DIMS[key] and residual <= 1e-6
    report.checks.append(CheckResult(f"relations_{name}", stat, residual, 1e-6, ok))


def sign_pattern_search(basis: RelationBasis, block: int = 9) -> list[list[list[int]]]:
    """Per block of members: every sign vector s in {+1,-1}^block whose signed sum lies in the nullspace."""
    out = []
    n = len(basis.labels)
    for start in range(0, n, block):
        found = []
        for bits in range(2 ** (block - 1)):
            s = [1] + [(-1 if bits >> k & 1 else 1) for k in range(block - 1)]
            vec = np.zeros(n)
            vec[start:start + block] = s
            if basis.contains(vec):
                found.append(s)
        out.append(found)
    return out


def _relation_checks(cfg: SuiteConfig, report: IdentityReport, names: list[str]):
    for name in names:
        stats = [BOSONIC] if name in ("I", "J", "IJ", "phi4") else list(cfg.statistics)
        for stat in stats:
            sample_stat = stat
            basis = discover(name, sample_stat, cfg.samples, cfg.seed)
            report.relations.append(RelationResult(name, stat, basis))
            _relation_check(report, name, stat, basis, cfg.assume or stat)
            if name == "mixed":
                patterns = sign_pattern_search(basis)
                overall = basis.contains(np.ones(len(basis.labels)))
                report.notes.setdefault("mixed_sign_patterns", {})[stat] = {
                    "per_family": patterns, "overall_sum_vanishes": overall}
                report.checks.append(CheckResult("mixed_overall_sum", stat, basis.span_residual(np.ones(27)),
                                                 1e-6, None))


def _phi4_extra_checks(cfg: SuiteConfig, report: IdentityReport):
    """Reduction of the first trace scalar for Phi = phi (x) Id / 2, and reality of the four scalars."""
    reduce, real14, conj23 = _Tracker(), _Tracker(), _Tracker()
    for i in range(cfg.samples):
        b = inv.sample_gauge_higgs(cfg.seed, i)
        phi = b["phi"].data
        ident = np.eye(2) / 2
        Phi = Tensor(slots("i^ d^ d_"), np.einsum("a,bc->abc", phi, ident))
        p1 = complex(inv.eval_phi4_traces(Phi, Phi.conjugate())[0].data)
        norm4 = float(np.sum(np.abs(phi) ** 2)) ** 2
        reduce.add(abs(p1 - norm4), norm4)
        r = inv.sample_Phi(cfg.seed, i)
        vals = [complex(v.data) for v in inv.eval_phi4_traces(r["Phi"], r["PhiBar"])]
        scale = max(abs(v) for v in vals)
        real14.add(max(abs(vals[0].imag), abs(vals[3].imag)), scale)
        conj23.add(abs(vals[1] - np.conj(vals[2])), scale)
    add = report.checks.append
    add(CheckResult("phi4_identity_reduction", BOSONIC, reduce.worst, cfg.tol, reduce.worst <= cfg.tol))
    add(CheckResult("phi4_first_last_real", BOSONIC, real14.worst, cfg.tol, real14.worst <= cfg.tol))
    add(CheckResult("phi4_middle_pair_conjugate", BOSONIC, conj23.worst, cfg.tol, conj23.worst <= cfg.tol))


def _threeleg_checks(cfg: SuiteConfig, report: IdentityReport):
    lin, zero = _Tracker(), 0.0
    for i in range(cfg.samples):
        b = {**inv.sample_Phi(cfg.seed, i), **inv.sample_covectors(cfg.seed, i)}
        c = complex(stream(cfg.seed, i, "threeleg-scale").normal(size=2) @ [1, 1j])
        base = inv.eval_momentum_threeleg(b["Wv"], b["k"], b["Phi"], b["PhiBar"], 0.7)
        scaled = inv.eval_momentum_threeleg(b["Wv"], b["k"], b["Phi"] * c, b["PhiBar"], 0.7)
        for x, y in zip(base, scaled):
            lin.add(abs(complex(y.data) - c * complex(x.data)), abs(c * complex(x.data)) + abs(complex(y.data)))
        zk = inv.eval_momentum_threeleg(b["Wv"], b["k"] * 0.0, b["Phi"], b["PhiBar"], 0.7)
        zero = max(zero, max(abs(complex(x.data)) for x in zk))
    report.checks.append(CheckResult("threeleg_multilinear", BOSONIC, lin.worst, 1e-12, lin.worst <= 1e-12))
    report.checks.append(CheckResult("threeleg_zero_momentum", BOSONIC, zero, 0.0, zero == 0.0))


# -- entry point ------------------------------------------------------------------------------


_FAMILY_SUITES = {"I": ["I"], "J": ["J"], "S": ["S"], "Sprime": ["Sprime"], "T18": ["T18"],
                  "phi4": ["phi4"], "mixed": []}
_RELATION_SUITES = {"I": ["I"], "J": ["J", "IJ"], "S": ["S"], "mixed": ["mixed"]}


def run_identity_suite(config: SuiteConfig | None = None) -> IdentityReport:
    cfg = config or SuiteConfig()
    report = IdentityReport(cfg)
    wanted = SUITES[1:] if cfg.suite == "all" else (cfg.suite,)

    def timed(label, fn, *args):
        t0 = time.perf_counter()
        fn(*args)
        report.timings[label] = time.perf_counter() - t0

    if "geometry" in wanted:
        timed("geometry", _geometry_checks, cfg, report)
    if "qed" in wanted:
        timed("qed", _qed_checks, cfg, report)
    if "ew" in wanted:
        timed("ew", _ew_checks, cfg, report)
    registry = {f.name: f for f in _family_registry()}
    for suite in wanted:
        fams = [registry[n] for n in _FAMILY_SUITES.get(suite, [])]
        if fams:
            timed(f"family:{suite}", _family_checks, cfg, report, fams)
        rels = _RELATION_SUITES.get(suite, [])
        if rels:
            timed(f"relations:{suite}", _relation_checks, cfg, report, rels)
    if "S" in wanted:
        timed("signs", resolve_signs, cfg, report)
    if "phi4" in wanted:
        timed("phi4-extra", _phi4_extra_checks, cfg, report)
    if "mixed" in wanted:
        timed("threeleg", _threeleg_checks, cfg, report)
    return report


def mutation_sweep(config: SuiteConfig | None = None, samples: int = 20) -> list[tuple[str, str, str, float]]:
    """Perturb each coefficient of each multi-term identity by +1; report the relative residual reached.

    Single-member vanishing claims have no coefficient to perturb; they are
    covered by :func:`vanishing_controls` instead.
    """
    cfg = config or SuiteConfig()
    out = []
    for fam in _family_registry():
        for stat in fam.statistics:
            idents = [idn for idn in fam.identities if stat in idn.statistics and not idn.vanishing]
            worst = {(idn.name, lab): 0.0 for idn in idents for lab in idn.coefficients}
            for i in range(samples):
                values, mags = fam.evaluate(cfg.seed, i, stat)
                for idn in idents:
                    for lab in idn.coefficients:
                        r = _rel(*identity_residual(idn, values, mags, lab))
                        worst[(idn.name, lab)] = max(worst[(idn.name, lab)], r)
            out += [(name, lab, stat, val) for (name, lab), val in worst.items()]
    return out


def vanishing_controls(config: SuiteConfig | None = None, samples: int = 20) -> dict[str, float]:
    """Relative size of each single-member vanishing quantity where it is *not* expected to vanish.

    S5 and the fifth member of the second 18-family sum are evaluated on
    fermionic samples; the isospin-symplectic Phi^4 contractions are
    recomputed with a symmetric form in place of eps.
    """
    cfg = config or SuiteConfig()
    iso_lo = Tensor(slots("i_ i_"), np.array([[0.0, 1.0], [1.0, 0.0]]))
    iso_up = Tensor(slots("i^ i^"), np.array([[0.0, 1.0], [1.0, 0.0]]))
    spec = "ab,cd,aEE,bFF,cAB,dBA"
    s5, u5, x = 0.0, 0.0, 0.0
    for i in range(samples):
        b = inv.sample_omega(cfg.seed, i, FERMIONIC, "spinor")
        _, second = inv.eval_18_family(b["Omega"], b["OmegaBar"], 1.0, FERMIONIC)
        _, second_mag = inv.eval_18_family(b["Omega"], b["OmegaBar"], 1.0, FERMIONIC, magnitude=True)
        u5 = max(u5, _rel(max(abs(v) for v in coefficient_map(second[4]).values()),
                          inv.magnitude_of(second_mag[4])))
        vals, mags = _family_S(cfg.seed, i, FERMIONIC)
        s5 = max(s5, _rel(max(abs(v) for v in coefficient_map(vals["S5"]).values()), mags["S5"]))
        p = inv.sample_Phi(cfg.seed, i)
        ops = (iso_lo, iso_up, p["Phi"], p["Phi"], p["PhiBar"], p["PhiBar"])
        val = einsum_graded(spec, *ops)
        x = max(x, _rel(abs(complex(val.data)), inv.magnitude_of(einsum_graded(spec, *ops, magnitude=True))))
    return {"S_S5_vanishes": s5, "T18_second_member_5_vanishes": u5, "phi4_isospin_symplectic": x}
