"""Invariant scalar families built from gauge, Higgs and Omega fields.

All evaluators return rank-0 :class:`Tensor` values (graded scalars).  Index
conventions for the inputs:

* ``W``: slots (spacetime down, isospin up, isospin down), W_lambda^alpha_alpha'
* ``phi`` (isospin up) and ``phibar`` (isospin down)
* vector-type Omega: (spacetime down, isospin up); its conjugate (spacetime down, isospin down)
* spinor-type Omega: (isospin up, spinor down, dotted down); conjugate (isospin down, spinor down, dotted down)
* ``Phi``: (isospin up, dotted up, dotted down); ``PhiBar``: (isospin down, spinor up, spinor down)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .contractions import DELTA_PAIR, ContractionScheme, enumerate_pair_contractions
from .grassmann import GeneratorPool
from .relations import coefficient_map
from .sampling import BOSONIC, STATISTICS, sample_random, stream
from .spinors import DUAL_PAULI_FRAME
from .tensor import (DOWN, UP, ParityError, Species, Tensor, antisymmetrize, einsum_graded, epsilon,
                     metric, slots)

SPINOR_GROUP = ["A", "B", "C", "D"]
DOTTED_GROUP = ["A'", "B'", "C'", "D'"]
#: einsum letters used for the eight spinor slot labels
_LETTER = {"A": "A", "B": "B", "C": "C", "D": "D", "A'": "E", "B'": "F", "C'": "G", "D'": "H"}


def _g() -> Tensor:
    return metric(UP)


def _eps_iso(variance: str, phase: complex) -> Tensor:
    return epsilon(Species.ISOSPIN, variance, phase)


def check_statistics(statistics: str, *tensors: Tensor) -> None:
    """Raise ParityError when a sample's Grassmann degree contradicts the requested statistics."""
    if statistics not in STATISTICS:
        raise ValueError(f"statistics must be one of {STATISTICS}")
    want = 0 if statistics == BOSONIC else 1
    for t in tensors:
        if t.degree != want:
            raise ParityError(f"{statistics} evaluation got a tensor of Grassmann degree {t.degree}")


# -- gauge and Higgs invariants ----------------------------------------------------


def eval_I_family(W: Tensor, phi: Tensor, phibar: Tensor, g: Tensor | None = None) -> list[Tensor]:
    g = g or _g()
    return [
        einsum_graded("lm,lab,mca,b,c", g, W, W, phi, phibar),
        einsum_graded("lm,lab,mcc,b,a", g, W, W, phi, phibar),
        einsum_graded("lm,laa,mcc,b,b", g, W, W, phi, phibar),
        einsum_graded("lm,lab,mba,c,c", g, W, W, phi, phibar),
    ]


def eval_J_family(W: Tensor, phi: Tensor, phibar: Tensor, g: Tensor | None = None,
                  eps_phase: complex = 1.0) -> list[Tensor]:
    g = g or _g()
    lo, up = _eps_iso(DOWN, eps_phase), _eps_iso(UP, eps_phase)
    return [
        einsum_graded("lm,ac,xy,lax,mcy,d,d", g, lo, up, W, W, phi, phibar),
        einsum_graded("lm,ac,xz,lax,mbb,c,z", g, lo, up, W, W, phi, phibar),
        einsum_graded("lm,ac,yz,lab,mby,c,z", g, lo, up, W, W, phi, phibar),
    ]


# -- Omega sector -------------------------------------------------------------------


@dataclass(frozen=True)
class MTensor:
    """M_{lambda mu alpha}^beta = m^2 OmegaBar_{lambda alpha} Omega_mu^beta."""

    components: Tensor

    @classmethod
    def build(cls, omega: Tensor, omega_bar: Tensor, m: float) -> "MTensor":
        return cls(einsum_graded("la,mb->lmab", omega_bar, omega) * (m * m))

    @property
    def spacetime(self) -> Tensor:
        """M_{lambda mu}: trace over the isospin pair."""
        return einsum_graded("lmaa->lm", self.components)

    @property
    def isospin(self) -> Tensor:
        """M_alpha^beta: g-trace over the spacetime pair."""
        return einsum_graded("lm,lmab->ab", _g(), self.components)

    @property
    def full(self) -> Tensor:
        return einsum_graded("lm,lmaa", _g(), self.components)


def eval_S_family(omega: Tensor, omega_bar: Tensor, m: float, statistics: str, g: Tensor | None = None,
                  eps_phase: complex = 1.0, magnitude: bool = False) -> list[Tensor]:
    check_statistics(statistics, omega, omega_bar)
    g = g or _g()
    mm = MTensor.build(omega, omega_bar, m).components
    lo, up = _eps_iso(DOWN, eps_phase), _eps_iso(UP, eps_phase)
    specs = [("lm,nr,lmaa,nrbb", g, g, mm, mm),
             ("ln,mr,lmaa,nrbb", g, g, mm, mm),
             ("lr,mn,lmaa,nrbb", g, g, mm, mm),
             ("lm,nr,ax,by,lmab,nrxy", g, g, up, lo, mm, mm),
             ("ln,mr,ax,by,lmab,nrxy", g, g, up, lo, mm, mm)]
    return [einsum_graded(*spec, magnitude=magnitude) for spec in specs]


def s_crossed(omega: Tensor, omega_bar: Tensor, m: float, statistics: str, g: Tensor | None = None,
              eps_phase: complex = 1.0) -> Tensor:
    """g^{lambda rho} g^{mu nu} eps^{alpha alpha'} eps_{beta beta'} M_{lambda mu alpha}^beta M_{nu rho alpha'}^beta'."""
    check_statistics(statistics, omega, omega_bar)
    g = g or _g()
    mm = MTensor.build(omega, omega_bar, m).components
    lo, up = _eps_iso(DOWN, eps_phase), _eps_iso(UP, eps_phase)
    return einsum_graded("lr,mn,ax,by,lmab,nrxy", g, g, up, lo, mm, mm)


def m_exchange(omega: Tensor, omega_bar: Tensor, m: float,
               indices: Sequence[tuple[int, int, int, int]]) -> list[tuple[Tensor, Tensor]]:
    """(M_{lambda mu alpha}^beta M_{nu rho beta}^alpha, M_{lambda rho} M_{nu mu}) at each (lambda, mu, nu, rho).

    The two agree for bosonic samples and differ by a sign for fermionic ones.
    Only the requested components are formed; the full rank-4 tensor is large
    once Grassmann axes are attached.
    """
    full = MTensor.build(omega, omega_bar, m).components
    iso = full.slots[2:]

    def block(a: int, b: int) -> Tensor:
        return Tensor(iso, full.data[a, b], full.degree)

    out = []
    for lam, mu, nu, rho in indices:
        crossed = einsum_graded("ab,ba", block(lam, mu), block(nu, rho))
        traced = einsum_graded("aa,bb", block(lam, rho), block(nu, mu))
        out.append((crossed, traced))
    return out


def eval_Sprime_family(omega: Tensor, omega_bar: Tensor, phi: Tensor, phibar: Tensor, m: float,
                       statistics: str, g: Tensor | None = None, eps_phase: complex = 1.0) -> list[Tensor]:
    check_statistics(statistics, omega, omega_bar)
    g = g or _g()
    lo, up = _eps_iso(DOWN, eps_phase), _eps_iso(UP, eps_phase)
    m2 = m * m
    return [
        einsum_graded("lm,la,ma,b,b", g, omega_bar, omega, phibar, phi) * m2,
        einsum_graded("lm,la,mb,b,a", g, omega_bar, omega, phibar, phi) * m2,
        einsum_graded("lm,ax,by,la,mb,x,y", g, up, lo, omega_bar, omega, phibar, phi) * m2,
    ]


def omega_square(omega: Tensor, omega_bar: Tensor, g: Tensor | None = None) -> Tensor:
    """Omega^2 = g^{lambda mu} OmegaBar_{lambda alpha} Omega_mu^alpha."""
    return einsum_graded("lm,la,ma", g or _g(), omega_bar, omega)


def norm_square(phi: Tensor, phibar: Tensor) -> Tensor:
    return einsum_graded("a,a", phibar, phi)


def assembled_potential(omega: Tensor, omega_bar: Tensor, phi: Tensor, phibar: Tensor, m: float,
                        statistics: str, eps_phase: complex = 1.0) -> tuple[dict, dict]:
    """Both sides of  -|phi|^4 - sum S' = -(|phi|^4 + 2 m^2 Omega^2 |phi|^2)  as coefficient maps."""
    sp = eval_Sprime_family(omega, omega_bar, phi, phibar, m, statistics, eps_phase=eps_phase)
    n2 = norm_square(phi, phibar)
    quartic = complex(n2.data) ** 2
    cross = einsum_graded(",", omega_square(omega, omega_bar), n2) * (2 * m * m)
    lhs = combine([{0: quartic}] + [coefficient_map(x) for x in sp], [-1, -1, -1, -1])
    rhs = combine([{0: quartic}, coefficient_map(cross)], [-1, -1])
    return lhs, rhs


# -- spinor-index families ------------------------------------------------------------


def _scheme_operands(factors: Sequence[tuple[Tensor, list[str]]], scheme: ContractionScheme,
                     spinor_phase: complex) -> tuple[str, list[Tensor]]:
    """einsum string and operands for ``factors`` contracted along ``scheme``.

    ``factors`` pairs each tensor with its slot labels (spinor labels from the
    scheme, other labels passed through verbatim as einsum letters).
    """
    rename: dict[str, str] = {}
    extra = []
    for p in scheme.pairings:
        if p.obj == DELTA_PAIR:
            rename[p.second] = p.first
        else:
            species = Species.DOTTED if p.first.endswith("'") else Species.SPINOR
            phase = np.conj(spinor_phase) if species is Species.DOTTED else spinor_phase
            extra.append((epsilon(species, UP, phase), [p.first, p.second]))

    def letter(x: str) -> str:
        x = rename.get(x, x)
        return _LETTER.get(x, x)

    terms, operands = [], []
    for t, labels in list(factors) + extra:
        terms.append("".join(letter(x) for x in labels))
        operands.append(t)
    return ",".join(terms) + "->", operands


def _run_scheme(factors, scheme, spinor_phase, magnitude=False) -> Tensor:
    spec, ops = _scheme_operands(factors, scheme, spinor_phase)
    return einsum_graded(spec, *ops, magnitude=magnitude)


def eighteen_schemes() -> list[ContractionScheme]:
    return enumerate_pair_contractions([SPINOR_GROUP, DOTTED_GROUP], "eps")


def _eighteen_factors(omega: Tensor, omega_bar: Tensor, eps_phase: complex):
    first = [(omega_bar, ["a", "A", "A'"]), (omega, ["a", "B", "B'"]),
             (omega_bar, ["b", "C", "C'"]), (omega, ["b", "D", "D'"])]
    second = [(omega_bar, ["a", "A", "A'"]), (omega, ["b", "B", "B'"]),
              (omega_bar, ["x", "C", "C'"]), (omega, ["y", "D", "D'"]),
              (_eps_iso(UP, eps_phase), ["a", "x"]), (_eps_iso(DOWN, eps_phase), ["b", "y"])]
    return first, second


def eval_18_family(omega: Tensor, omega_bar: Tensor, m: float, statistics: str, eps_phase: complex = 1.0,
                   spinor_phase: complex = 1.0, magnitude: bool = False) -> tuple[list[Tensor], list[Tensor]]:
    """Two 9-tuples: isospin trace-trace and isospin-symplectic, times the nine spinor pairings."""
    check_statistics(statistics, omega, omega_bar)
    scale = m ** 4
    out = []
    for factors in _eighteen_factors(omega, omega_bar, eps_phase):
        out.append([_run_scheme(factors, sch, spinor_phase, magnitude) * scale for sch in eighteen_schemes()])
    return out[0], out[1]


def _trace_route(x: Tensor) -> Tensor:
    """TrX_a TrX_b - Tr(X_a X_b) for an isospin-indexed family of 2x2 endomorphisms."""
    return einsum_graded("aAA,bCC->ab", x, x) - einsum_graded("aAB,bBA->ab", x, x)


def phi4_epsilon_routes(Phi: Tensor, PhiBar: Tensor, spinor_phase: complex = 1.0) -> list[tuple[Tensor, Tensor]]:
    """(eps route, trace route) for PhiBar with eps and for Phi with the conjugate eps."""
    e_up = epsilon(Species.SPINOR, UP, spinor_phase)
    e_lo = epsilon(Species.SPINOR, DOWN, spinor_phase)
    d_up = epsilon(Species.DOTTED, UP, np.conj(spinor_phase))
    d_lo = epsilon(Species.DOTTED, DOWN, np.conj(spinor_phase))
    bar = einsum_graded("BD,AC,aAB,bCD->ab", e_up, e_lo, PhiBar, PhiBar)
    plain = einsum_graded("BD,AC,aAB,bCD->ab", d_up, d_lo, Phi, Phi)
    return [(bar, _trace_route(PhiBar)), (plain, _trace_route(Phi))]


def eval_phi4_traces(Phi: Tensor, PhiBar: Tensor) -> list[Tensor]:
    t = einsum_graded("aEE,aAA", Phi, PhiBar)
    return [
        einsum_graded(",", t, t),
        einsum_graded("aEE,bFF,aAB,bBA", Phi, Phi, PhiBar, PhiBar),
        einsum_graded("aAA,bBB,aEF,bFE", PhiBar, PhiBar, Phi, Phi),
        einsum_graded("aEF,bFE,aAB,bBA", Phi, Phi, PhiBar, PhiBar),
    ]


def phi4_isospin_symplectic(Phi: Tensor, PhiBar: Tensor, eps_phase: complex = 1.0,
                            magnitude: bool = False) -> list[Tensor]:
    """Contractions of Phi^a Phi^b PhiBar_c PhiBar_d through eps_{ab} eps^{cd}."""
    lo, up = _eps_iso(DOWN, eps_phase), _eps_iso(UP, eps_phase)
    plain = ["aEE,bFF", "aEF,bFE"]
    bar = ["cAA,dBB", "cAB,dBA"]
    return [einsum_graded(f"ab,cd,{p},{q}", lo, up, Phi, Phi, PhiBar, PhiBar, magnitude=magnitude)
            for p in plain for q in bar]


MIXED_ISOSPIN = (
    # Phi, PhiBar, Omega, OmegaBar isospin letters, plus optional eps factors
    (["a"], ["a"], ["b"], ["b"], []),
    (["a"], ["b"], ["b"], ["a"], []),
    (["a"], ["x"], ["b"], ["y"], [("lo", ["a", "b"]), ("up", ["x", "y"])]),
)


def mixed_schemes() -> list[ContractionScheme]:
    return enumerate_pair_contractions([["A", "B", "C", "D"], ["A'", "B'", "C'", "D'"]], "delta-eps")


def eval_mixed_PhiOmega(Phi: Tensor, PhiBar: Tensor, omega: Tensor, omega_bar: Tensor, statistics: str,
                        eps_phase: complex = 1.0, spinor_phase: complex = 1.0,
                        magnitude: bool = False) -> list[list[Tensor]]:
    """Three isospin contractions of Phi PhiBar Omega OmegaBar, nine spinor pairings each.

    Spinor roles: PhiBar carries A (up) and B; Omega carries C, OmegaBar D; the
    dotted labels follow the same pattern with Phi carrying A' (up) and B'.
    """
    check_statistics(statistics, omega, omega_bar)
    forms = {"lo": _eps_iso(DOWN, eps_phase), "up": _eps_iso(UP, eps_phase)}
    out = []
    for p_iso, pb_iso, o_iso, ob_iso, eps in MIXED_ISOSPIN:
        factors = [(Phi, p_iso + ["A'", "B'"]), (PhiBar, pb_iso + ["A", "B"]),
                   (omega, o_iso + ["C", "C'"]), (omega_bar, ob_iso + ["D", "D'"])]
        factors += [(forms[k], labels) for k, labels in eps]
        out.append([_run_scheme(factors, sch, spinor_phase, magnitude) for sch in mixed_schemes()])
    return out


def threeleg_schemes() -> list[ContractionScheme]:
    return enumerate_pair_contractions([["C", "A", "B", "D"], ["C'", "A'", "B'", "D'"]], "delta-eps")


def covector_to_spinor(w: Tensor) -> Tensor:
    """Spacetime covector to its (spinor down, dotted down) components via the dual Pauli frame."""
    data = np.einsum("l,lab->ab", w.data, DUAL_PAULI_FRAME)
    return Tensor(slots("s_ d_"), data, w.degree)


def eval_momentum_threeleg(W: Tensor, k: Tensor, Phi: Tensor, PhiBar: Tensor, q: float,
                           spinor_phase: complex = 1.0) -> list[Tensor]:
    """q W_{A A'} k_{B B'} PhiBar_a^C_D Phi^{a C'}_{D'} over the nine delta/eps pairings."""
    w, kk = covector_to_spinor(W), covector_to_spinor(k)
    factors = [(w, ["A", "A'"]), (kk, ["B", "B'"]), (PhiBar, ["a", "C", "D"]), (Phi, ["a", "C'", "D'"])]
    return [_run_scheme(factors, sch, spinor_phase) * q for sch in threeleg_schemes()]


# -- residuals ------------------------------------------------------------------------


def combine(maps: Sequence[dict], coeffs: Sequence[float]) -> dict:
    out: dict[int, complex] = {}
    for mp, cf in zip(maps, coeffs):
        for k, v in mp.items():
            out[k] = out.get(k, 0) + cf * v
    return out


def max_abs(mp: dict) -> float:
    return max((abs(v) for v in mp.values()), default=0.0)


def identity_residual(values: Sequence, coeffs: Sequence[float]) -> tuple[float, float]:
    """(max coefficient of sum c_i X_i, scale sum |c_i| max|X_i|)."""
    maps = [coefficient_map(v) for v in values]
    res = max_abs(combine(maps, coeffs))
    scale = sum(abs(c) * max_abs(mp) for c, mp in zip(coeffs, maps))
    return res, scale


def magnitude_of(value: Tensor) -> float:
    """Largest pre-cancellation magnitude of a scalar computed with ``magnitude=True``."""
    return float(np.max(antisymmetrize(value.data, value.degree, absolute=True), initial=0.0))


# -- samplers -------------------------------------------------------------------------


def _bosonic(rng, spec: str) -> Tensor:
    return sample_random(slots(spec), BOSONIC, rng)


def sample_gauge_higgs(seed: int, index: int) -> dict:
    rng = stream(seed, index, "gauge-higgs")
    phi = _bosonic(rng, "i^")
    return {"W": _bosonic(rng, "t_ i^ i_"), "phi": phi, "phibar": phi.conjugate()}


def sample_omega(seed: int, index: int, statistics: str, shape: str = "vector") -> dict:
    """Omega sample and its conjugate.

    Fermionic entries are c_i theta_i; the conjugate uses the conjugate
    generators theta_bar_i, independent odd elements of the complex Grassmann
    algebra, so each (Omega, OmegaBar) pair spans 16 generators.
    """
    rng = stream(seed, index, f"omega-{shape}-{statistics}")
    spec = "t_ i^" if shape == "vector" else "i^ s_ d_"
    pool = GeneratorPool()
    omega = sample_random(slots(spec), statistics, rng, pool)
    if statistics == BOSONIC:
        bar = omega.conjugate()
    else:
        pool.allocate_conjugates(list(range(pool.count)), "conjugate")
        omega = omega.with_generators(pool.count)
        bar = omega.conjugate(pool.involution())
    if shape == "spinor":
        bar = bar.transpose((0, 2, 1))
    return {"Omega": omega, "OmegaBar": bar}


def sample_Phi(seed: int, index: int) -> dict:
    rng = stream(seed, index, "Phi")
    phi = _bosonic(rng, "i^ d^ d_")
    return {"Phi": phi, "PhiBar": phi.conjugate()}


def sample_covectors(seed: int, index: int) -> dict:
    rng = stream(seed, index, "covectors")
    return {"Wv": Tensor(slots("t_"), rng.standard_normal(4)), "k": Tensor(slots("t_"), rng.standard_normal(4)),
            "phase": complex(np.exp(2j * np.pi * rng.random()))}


def sample_phase(seed: int, index: int, label: str = "phase") -> complex:
    rng = stream(seed, index, label)
    return complex(np.exp(2j * np.pi * rng.random()))

