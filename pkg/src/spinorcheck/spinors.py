"""Two-spinor constructions: Lorentz metric, Clifford map, Dirac adjunction, tau, QED vertex.

Conventions.  A 2-spinor ``u`` has upper components ``u^A``; a dotted covector
``lambda_bar`` has components ``lambda_bar_{A.}``.  Elements of ``U (x) conj(U)``
are 2x2 arrays ``Y[A, A.]``.  The symplectic form is ``eps_{AB} = phase * E``
with ``E = [[0, 1], [-1, 0]]``; lowering is ``u_B = u^A eps_{AB}`` and raising
is ``l^A = eps^{AB} l_B`` with ``eps^{AB} = conj(phase) * E``, so that
raising undoes lowering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import EPS, METRIC_SIGNATURE

SQRT2 = np.sqrt(2.0)

PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

#: Pauli frame tau_lambda^{A A.} of H, orthonormal for the metric built from eps
PAULI_FRAME = PAULI / SQRT2
#: dual frame tau^lambda_{A A.}, so that tau^lambda_{A A.} tau_mu^{A A.} = delta^lambda_mu
DUAL_PAULI_FRAME = np.conj(PAULI) / SQRT2

MINKOWSKI = np.diag(np.array(METRIC_SIGNATURE, dtype=float))


class SingularSpinorError(ValueError):
    pass


class OffShellError(ValueError):
    pass


@dataclass(frozen=True)
class EpsilonForm:
    """Normalized symplectic form on U; any two differ by a unit phase."""

    phase: complex = 1.0

    def __post_init__(self):
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError("epsilon phase must have unit modulus")

    @classmethod
    def from_angle(cls, angle: float) -> "EpsilonForm":
        return cls(complex(np.exp(1j * angle)))

    @property
    def lower(self) -> np.ndarray:
        return self.phase * EPS

    @property
    def upper(self) -> np.ndarray:
        return np.conj(self.phase) * EPS

    @property
    def lower_bar(self) -> np.ndarray:
        return np.conj(self.lower)

    @property
    def upper_bar(self) -> np.ndarray:
        return np.conj(self.upper)

    def flat(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("a,ab->b", u, self.lower)

    def sharp(self, lam: np.ndarray) -> np.ndarray:
        return self.upper @ lam

    def flat_bar(self, s: np.ndarray) -> np.ndarray:
        return np.einsum("a,ab->b", s, self.lower_bar)

    def sharp_bar(self, lam_bar: np.ndarray) -> np.ndarray:
        return self.upper_bar @ lam_bar

    def __call__(self, u: np.ndarray, r: np.ndarray) -> complex:
        return complex(u @ self.lower @ r)


@dataclass(frozen=True)
class HVector:
    """Element of U (x) conj(U); Hermitian members form the Minkowski space H."""

    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=complex).reshape(2, 2))

    @classmethod
    def from_components(cls, comps) -> "HVector":
        return cls(np.einsum("l,lab->ab", np.asarray(comps, dtype=complex), PAULI_FRAME))

    @classmethod
    def simple(cls, r: np.ndarray, s: np.ndarray) -> "HVector":
        """r (x) conj(s)."""
        return cls(np.outer(r, np.conj(s)))

    def components(self) -> np.ndarray:
        return np.einsum("lab,ab->l", DUAL_PAULI_FRAME, self.y)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.y, self.y.conj().T, atol=tol * max(1.0, np.abs(self.y).max())))

    def __add__(self, other: "HVector") -> "HVector":
        return HVector(self.y + other.y)

    def __sub__(self, other: "HVector") -> "HVector":
        return HVector(self.y - other.y)

    def __mul__(self, c) -> "HVector":
        return HVector(self.y * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class DiracSpinor:
    """psi = (u, lambda_bar) in U (+) conj(U)*."""

    u: np.ndarray
    lambda_bar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=complex).reshape(2))
        object.__setattr__(self, "lambda_bar", np.asarray(self.lambda_bar, dtype=complex).reshape(2))

    @classmethod
    def from_vector(cls, v) -> "DiracSpinor":
        v = np.asarray(v, dtype=complex)
        return cls(v[:2], v[2:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.lambda_bar])

    @property
    def lam(self) -> np.ndarray:
        """lambda in U*, the conjugate of lambda_bar."""
        return np.conj(self.lambda_bar)


@dataclass(frozen=True)
class DiracCovector:
    """psi_bar = (chi_bar, u_bar) in U* (+) conj(U), paired with Dirac spinors."""

    chi_bar: np.ndarray
    u_bar: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.chi_bar, self.u_bar])

    def __call__(self, psi: DiracSpinor) -> complex:
        return complex(self.chi_bar @ psi.u + self.u_bar @ psi.lambda_bar)

    def adjoint(self) -> DiracSpinor:
        return DiracSpinor(np.conj(self.u_bar), np.conj(self.chi_bar))


@dataclass(frozen=True)
class GaugeFieldLocal:
    """alpha^i_a with structure constants c^i_{jk}; stored as alpha[i, a]."""

    alpha: np.ndarray
    structure: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.structure)
        if not np.allclose(c, -np.swapaxes(c, 1, 2)):
            raise ValueError("structure constants must be antisymmetric in the lower pair")


# -- metric and Clifford map --------------------------------------------------


def lorentz_metric(eps: EpsilonForm = EpsilonForm()):
    """g(x, y) = eps_{AB} conj(eps)_{A.B.} x^{AA.} y^{BB.}."""
    lo, lo_bar = eps.lower, eps.lower_bar

    def g(x: HVector, y: HVector) -> complex:
        return complex(np.einsum("ab,cd,ac,bd->", lo, lo_bar, x.y, y.y))

    return g


def gram_matrix(eps: EpsilonForm = EpsilonForm()) -> np.ndarray:
    g = lorentz_metric(eps)
    frame = [HVector(t) for t in PAULI_FRAME]
    return np.array([[g(a, b) for b in frame] for a in frame])


def gamma(y: HVector, eps: EpsilonForm = EpsilonForm()) -> np.ndarray:
    """4x4 matrix of gamma(y) acting on (u^A, chi_{A.})."""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, 2:] = SQRT2 * y.y
    # chi'_{B.} = sqrt2 y^{A A.} eps_{AB} u^B conj(eps)_{A.B.}
    out[2:, :2] = SQRT2 * np.einsum("ac,ab,cd->db", y.y, eps.lower, eps.lower_bar)
    return out


def gamma_simple(r: np.ndarray, s: np.ndarray, psi_u: np.ndarray, psi_chi: np.ndarray,
                 eps: EpsilonForm = EpsilonForm()):
    """gamma(r (x) s_bar)(u, chi) straight from its defining pairing formula."""
    s_bar = np.conj(s)
    top = SQRT2 * (psi_chi @ s_bar) * r
    bottom = SQRT2 * (eps.flat(r) @ psi_u) * eps.flat_bar(s_bar)
    return top, bottom


def dirac_adjoint(psi: DiracSpinor) -> DiracCovector:
    """(u, chi) -> (conj chi, conj u)."""
    return DiracCovector(np.conj(psi.lambda_bar), np.conj(psi.u))


def dirac_form_matrix() -> np.ndarray:
    """Hermitian matrix B with <psi_bar, psi> = psi^dagger B psi."""
    b = np.zeros((4, 4))
    b[:2, 2:] = np.eye(2)
    b[2:, :2] = np.eye(2)
    return b


# -- tau and mass shells ------------------------------------------------------


def spinor_pairing(psi: DiracSpinor) -> complex:
    """<lambda, u>."""
    return complex(psi.lam @ psi.u)


def tau_of(psi: DiracSpinor, eps: EpsilonForm = EpsilonForm(), tol: float = 1e-12) -> HVector:
    """Unit timelike vector determined by psi = (u, lambda_bar)."""
    pair = spinor_pairing(psi)
    size = np.linalg.norm(psi.u) * np.linalg.norm(psi.lambda_bar)
    if abs(pair) <= tol * max(size, 1e-300):
        raise SingularSpinorError(f"<lambda, u> = {pair:.3g} is too small for tau")
    lam_sharp = eps.sharp(psi.lam)
    y = np.outer(psi.u, np.conj(psi.u)) + np.outer(lam_sharp, np.conj(lam_sharp))
    return HVector(y / (SQRT2 * abs(pair)))


def solve_tau(psi: DiracSpinor, sign: int = 1, eps: EpsilonForm = EpsilonForm()) -> tuple[HVector, float]:
    """Least-squares Hermitian tau' with gamma(tau') psi = sign * psi.

    Returns the solution and the residual norm of the linear system.
    """
    v = psi.vector()
    cols = [gamma(HVector(t), eps) @ v for t in PAULI_FRAME]
    a = np.array(cols).T
    a_real = np.vstack([a.real, a.imag])
    b = sign * v
    b_real = np.concatenate([b.real, b.imag])
    t, *_ = np.linalg.lstsq(a_real, b_real, rcond=None)
    res = float(np.linalg.norm(a_real @ t - b_real))
    return HVector.from_components(t), res


def sharp_covector(p) -> HVector:
    """Contravariant form of a covector given by its Pauli-frame components p_lambda."""
    return HVector.from_components(MINKOWSKI @ np.asarray(p, dtype=float))


def mass_shell_project(psi: DiracSpinor, p, m: float, eps: EpsilonForm = EpsilonForm(),
                       rel_tol: float = 1e-9) -> tuple[DiracSpinor, DiracSpinor]:
    """Split psi along Ker(gamma(p#) - m) (+) Ker(gamma(p#) + m)."""
    if m <= 0:
        raise ValueError("mass-shell projection needs m > 0")
    p_sharp = sharp_covector(p)
    norm2 = lorentz_metric(eps)(p_sharp, p_sharp).real
    if abs(norm2 - m * m) > rel_tol * m * m:
        raise OffShellError(f"g(p#, p#) - m^2 = {norm2 - m * m:.3g}")
    if p_sharp.components()[0].real <= 0:
        raise OffShellError("p is not future pointing")
    gp = gamma(p_sharp, eps)
    v = psi.vector()
    plus = 0.5 * (v + gp @ v / m)
    return DiracSpinor.from_vector(plus), DiracSpinor.from_vector(v - plus)


def projectors(p, m: float, eps: EpsilonForm = EpsilonForm()) -> tuple[np.ndarray, np.ndarray]:
    gp = gamma(sharp_covector(p), eps)
    eye = np.eye(4)
    return (m * eye + gp) / (2 * m), (m * eye - gp) / (2 * m)


# -- QED vertex ---------------------------------------------------------------


def qed_vertex(psi: DiracSpinor, a: HVector, psi_prime: DiracSpinor, e: float = 1.0,
               eps: EpsilonForm = EpsilonForm()) -> complex:
    """-e <psi_bar, gamma(A) psi'> through the Clifford map."""
    return complex(-e * dirac_adjoint(psi).vector() @ (gamma(a, eps) @ psi_prime.vector()))


def vertex_kernel_vector(psi: DiracSpinor, psi_prime: DiracSpinor, eps: EpsilonForm = EpsilonForm()) -> HVector:
    """u (x) v_bar + mu# (x) lambda_bar#, with psi = (v, mu_bar) and psi' = (u, lambda_bar)."""
    v, mu = psi.u, psi.lam
    u, lam_bar = psi_prime.u, psi_prime.lambda_bar
    return HVector(np.outer(u, np.conj(v)) + np.outer(eps.sharp(mu), eps.sharp_bar(lam_bar)))


def qed_vertex_two_spinor(psi: DiracSpinor, a: HVector, psi_prime: DiracSpinor, e: float = 1.0,
                          eps: EpsilonForm = EpsilonForm()) -> complex:
    """-e sqrt2 g(A, u (x) v_bar + mu# (x) lambda_bar#)."""
    k = vertex_kernel_vector(psi, psi_prime, eps)
    return -e * SQRT2 * lorentz_metric(eps)(a, k)


def project_out(a: HVector, k: HVector, eps: EpsilonForm = EpsilonForm()) -> HVector:
    """Component of ``a`` g-orthogonal to ``k`` (complex bilinear)."""
    g = lorentz_metric(eps)
    kk = g(k, k)
    if abs(kk) < 1e-14:
        raise SingularSpinorError("kernel vector is null; cannot project")
    return a - k * (g(a, k) / kk)


# -- curvature-like tensor ----------------------------------------------------


def curvature_like(p, alpha: GaugeFieldLocal) -> np.ndarray:
    """rho^i_{ab} = i(p_a alpha^i_b - p_b alpha^i_a) + c^i_{jk} alpha^j_a alpha^k_b."""
    p = np.asarray(p)
    al = np.asarray(alpha.alpha)
    lin = 1j * (np.einsum("a,ib->iab", p, al) - np.einsum("b,ia->iab", p, al))
    quad = np.einsum("ijk,ja,kb->iab", alpha.structure, al, al)
    return lin + quad


def gauge_replacement_residual(p, alpha: GaugeFieldLocal, chi) -> np.ndarray:
    """rho[p (x) chi + alpha] - rho[alpha]."""
    shifted = GaugeFieldLocal(np.asarray(alpha.alpha) + np.outer(chi, p), alpha.structure)
    return curvature_like(p, shifted) - curvature_like(p, alpha)


def su2_structure() -> np.ndarray:
    c = np.zeros((3, 3, 3))
    for (i, j, k), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                         (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
        c[i, j, k] = s
    return c
