"""Electroweak specialization: isospin frames, Higgs doublet, covariant derivative, vacuum splitting."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .spinors import PAULI, DUAL_PAULI_FRAME
from .tensor import Tensor, slots

SQRT2 = np.sqrt(2.0)

#: field names of the scalar fluctuations and the gauge covectors
SCALARS = ("H", "phi0", "phi_plus", "phi_minus")
VECTORS = ("A", "Z", "W_plus", "W_minus")


@dataclass(frozen=True)
class EWParams:
    q: float = 0.65
    theta: float = 0.5
    m: float = 1.0
    lam: float = 0.13

    def __post_init__(self):
        for name in ("q", "m", "lam"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.theta < np.pi / 2:
            raise ValueError("theta must lie strictly between 0 and pi/2")


def _unit(i: int, j: int) -> np.ndarray:
    e = np.zeros((2, 2), dtype=complex)
    e[i, j] = 1
    return e


def pauli_isospin_frame() -> np.ndarray:
    """iota_0 = identity, iota_1..3 the Pauli matrices, shape (4, 2, 2)."""
    return PAULI.copy()


@dataclass(frozen=True)
class BrokenFrame:
    """e', e'', e+, e- as 2x2 isospin endomorphisms (row = upper index)."""

    theta: float
    e_prime: np.ndarray
    e_second: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray

    def matrices(self) -> np.ndarray:
        return np.array([self.e_prime, self.e_second, self.e_plus, self.e_minus])

    def pauli_forms(self) -> np.ndarray:
        """The same four endomorphisms written as combinations of the Pauli frame."""
        s, c = np.sin(self.theta), np.cos(self.theta)
        i0, i1, i2, i3 = PAULI
        return np.array([
            -s * (i0 + i3),
            -s * np.tan(self.theta) * i0 + c * i3,
            (i1 - 1j * i2) / SQRT2,
            (i1 + 1j * i2) / SQRT2,
        ])


def broken_frame(theta: float) -> BrokenFrame:
    if not 0 < theta < np.pi / 2:
        raise ValueError("theta must lie strictly between 0 and pi/2 (sec and tan degenerate at the ends)")
    s, c = np.sin(theta), np.cos(theta)
    return BrokenFrame(
        theta,
        -2 * s * _unit(0, 0),
        (np.cos(2 * theta) * _unit(0, 0) - _unit(1, 1)) / c,
        SQRT2 * _unit(1, 0),
        SQRT2 * _unit(0, 1),
    )


@dataclass
class EWFieldSet:
    """Fluctuation fields at one point.

    ``phi_minus`` and ``W_minus`` default to the conjugates of their partners;
    passing them explicitly treats the pair as independent (holomorphic) variables.
    """

    H: complex = 0.0
    phi0: complex = 0.0
    phi_plus: complex = 0.0
    A: np.ndarray = field(default_factory=lambda: np.zeros(4))
    Z: np.ndarray = field(default_factory=lambda: np.zeros(4))
    W_plus: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=complex))
    phi_minus_value: complex | None = None
    W_minus_value: np.ndarray | None = None
    Omega: Tensor | None = None
    OmegaBar: Tensor | None = None
    Phi: Tensor | None = None
    PhiBar: Tensor | None = None

    @property
    def phi_minus(self) -> complex:
        return np.conj(self.phi_plus) if self.phi_minus_value is None else self.phi_minus_value

    @property
    def W_minus(self) -> np.ndarray:
        return np.conj(self.W_plus) if self.W_minus_value is None else np.asarray(self.W_minus_value)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "EWFieldSet":
        return cls(
            H=float(rng.normal()),
            phi0=float(rng.normal()),
            phi_plus=complex(rng.normal(), rng.normal()),
            A=rng.normal(size=4),
            Z=rng.normal(size=4),
            W_plus=rng.normal(size=4) + 1j * rng.normal(size=4),
        )


def random_momenta(rng: np.random.Generator) -> dict[str, np.ndarray]:
    return {name: rng.normal(size=4) for name in SCALARS}


# -- gauge field ---------------------------------------------------------------


def gauge_matrices(fields: EWFieldSet, frame: BrokenFrame) -> np.ndarray:
    """W_lambda = A e' + Z e'' + W+ e+ + W- e-, shape (4, 2, 2)."""
    comps = np.array([fields.A, fields.Z, fields.W_plus, fields.W_minus], dtype=complex)
    return np.einsum("kl,kab->lab", comps, frame.matrices())


def recompose_gauge_field(fields: EWFieldSet, frame: BrokenFrame, params: EWParams) -> Tensor:
    """W^alpha_{lambda alpha'} = (i/2) q W_lambda; slots (spacetime down, isospin up, isospin down)."""
    return Tensor(slots("t_ i^ i_"), 0.5j * params.q * gauge_matrices(fields, frame))


def decompose_gauge_field(w: Tensor, frame: BrokenFrame, params: EWParams) -> EWFieldSet:
    """Inverse of :func:`recompose_gauge_field` by a linear solve in the e-frame."""
    basis = frame.matrices().reshape(4, 4).T
    mats = np.asarray(w.data).reshape(4, 4) / (0.5j * params.q)
    comps = np.linalg.solve(basis, mats.T)
    return EWFieldSet(A=comps[0], Z=comps[1], W_plus=comps[2], W_minus_value=comps[3])


def iota_components(w: Tensor, params: EWParams) -> np.ndarray:
    """W^mu_lambda with (i/2) q W^mu_lambda iota_mu = W_lambda; array indexed [lambda, mu]."""
    mats = np.asarray(w.data) / (0.5j * params.q)
    return 0.5 * np.einsum("mba,lab->lm", PAULI, mats)


def right_sector_field(w: Tensor, params: EWParams) -> np.ndarray:
    """X_lambda from the induced action of W on the determinant line (X = W-hat)."""
    tr = np.einsum("laa->l", np.asarray(w.data))
    return tr / (1j * params.q)


# -- Higgs doublet -------------------------------------------------------------


def higgs_field_components(fields: EWFieldSet, params: EWParams) -> tuple[np.ndarray, np.ndarray]:
    """(phi^1, phi^2) and (phibar_1, phibar_2)."""
    up = np.array([params.m + fields.H + 1j * fields.phi0, fields.phi_plus])
    down = np.array([params.m + fields.H - 1j * fields.phi0, fields.phi_minus])
    return up, down


def higgs_potential(phi, phibar, params: EWParams):
    """V = lambda (2 m^2 s - s^2) with s = <phibar, phi>."""
    s = np.sum(np.asarray(phibar) * np.asarray(phi), axis=-1)
    return params.lam * (2 * params.m ** 2 * s - s ** 2)


def potential_of_norm(s, params: EWParams):
    return params.lam * (2 * params.m ** 2 * s - s ** 2)


def potential_extremum(params: EWParams) -> tuple[float, str]:
    """Stationary value of s and whether V has a minimum or a maximum there."""
    second = -2 * params.lam
    return params.m ** 2, "maximum" if second < 0 else "minimum"


def _derivatives(fields: EWFieldSet, momenta: dict, params: EWParams):
    p = {k: np.asarray(v) for k, v in momenta.items()}
    d_up = np.array([
        1j * p["H"] * fields.H - p["phi0"] * fields.phi0,
        1j * p["phi_plus"] * fields.phi_plus,
    ])
    d_down = np.array([
        1j * p["H"] * fields.H + p["phi0"] * fields.phi0,
        1j * p["phi_minus"] * fields.phi_minus,
    ])
    return d_up, d_down


def higgs_covariant_derivative(fields: EWFieldSet, momenta: dict, params: EWParams,
                               route: str = "formula") -> np.ndarray:
    """nabla_lambda phi^alpha as an array [alpha, lambda] after d -> i p.

    ``route="formula"`` uses the component formulas; ``route="matrix"`` acts with
    the recomposed gauge field on the doublet, including the determinant-line term.
    """
    q, th, m = params.q, params.theta, params.m
    d_up, _ = _derivatives(fields, momenta, params)
    if route == "formula":
        sec = 1 / np.cos(th)
        rad = m + fields.H + 1j * fields.phi0
        first = d_up[0] - 0.5j * q * sec * rad * fields.Z - 1j / SQRT2 * q * fields.phi_plus * fields.W_minus
        second = (d_up[1] - 1j * np.sin(th) * q * fields.phi_plus * fields.A
                  + 0.5j * sec * np.cos(2 * th) * q * fields.phi_plus * fields.Z
                  - 1j / SQRT2 * q * rad * fields.W_plus)
        return np.array([first, second])
    if route == "matrix":
        phi, _ = higgs_field_components(fields, params)
        w = np.asarray(recompose_gauge_field(fields, broken_frame(th), params).data)
        act = w - np.einsum("laa->l", w)[:, None, None] * np.eye(2)
        return d_up - np.einsum("lab,b->al", act, phi)
    raise ValueError(f"unknown route {route!r}")


def higgs_covariant_derivative_bar(fields: EWFieldSet, momenta: dict, params: EWParams) -> np.ndarray:
    """nabla_lambda phibar_alpha by the matrix route, [alpha, lambda]."""
    _, phibar = higgs_field_components(fields, params)
    _, d_down = _derivatives(fields, momenta, params)
    w = np.asarray(recompose_gauge_field(fields, broken_frame(params.theta), params).data)
    act = w - np.einsum("laa->l", w)[:, None, None] * np.eye(2)
    return d_down + np.einsum("lba,b->al", act, phibar)


def higgs_lagrangian(fields: EWFieldSet, momenta: dict, params: EWParams) -> complex:
    """g^{lambda mu} nabla phibar_alpha nabla phi^alpha + V, unit volume factor."""
    g = np.diag([1.0, -1.0, -1.0, -1.0])
    nab = higgs_covariant_derivative(fields, momenta, params, route="matrix")
    nab_bar = higgs_covariant_derivative_bar(fields, momenta, params)
    phi, phibar = higgs_field_components(fields, params)
    kinetic = np.einsum("lm,al,am->", g, nab_bar, nab)
    return complex(kinetic + higgs_potential(phi, phibar, params))


def with_fields(fields: EWFieldSet, **changes) -> EWFieldSet:
    return replace(fields, **changes)


# -- vacuum splitting ----------------------------------------------------------


@dataclass(frozen=True)
class VacuumSplit:
    h_left: np.ndarray
    image_basis: np.ndarray
    complement_basis: np.ndarray
    p_image: np.ndarray
    p_complement: np.ndarray
    conformal_factor: float
    conformal_residual: float
    mu2: float

    def adjoint(self, xi: np.ndarray) -> np.ndarray:
        """Adjoint with respect to the left Hermitian form."""
        h = self.h_left
        return np.linalg.solve(h, xi.conj().T @ h)

    def blocks(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(xi', xi+, xi-, xi_perp) with xi+ : F' -> F_perp and xi- : F_perp -> F'."""
        pi, pc = self.p_image, self.p_complement
        return pi @ xi @ pi, pc @ xi @ pi, pi @ xi @ pc, pc @ xi @ pc


def vacuum_split(h0: np.ndarray, h_right: np.ndarray, h_left: np.ndarray, tol: float = 1e-10) -> VacuumSplit:
    h0 = np.atleast_2d(np.asarray(h0, dtype=complex))
    h_right = np.atleast_2d(np.asarray(h_right, dtype=complex))
    h_left = np.atleast_2d(np.asarray(h_left, dtype=complex))
    n_left, n_right = h0.shape
    sv = np.linalg.svd(h0, compute_uv=False)
    if np.sum(sv > tol * sv.max(initial=0.0)) < min(n_left, n_right) or sv.max(initial=0.0) == 0:
        raise ValueError("vacuum map is not of maximal rank")
    pulled = h0.conj().T @ h_left @ h0
    factor = float(np.real(np.trace(np.linalg.solve(h_right, pulled))) / n_right)
    residual = float(np.abs(pulled - factor * h_right).max() / max(abs(factor), 1e-300))
    p_image = h0 @ np.linalg.solve(pulled, h0.conj().T @ h_left)
    p_comp = np.eye(n_left) - p_image

    def orthonormal(vectors: np.ndarray) -> np.ndarray:
        u, s, _ = np.linalg.svd(vectors)
        r = int(np.sum(s > tol * max(s.max(initial=0.0), 1e-300)))
        return u[:, :r]

    return VacuumSplit(h_left, orthonormal(p_image), orthonormal(p_comp), p_image, p_comp,
                       factor, residual, factor * n_right)


def pauli_dual_components(w_lambda: np.ndarray) -> np.ndarray:
    """Map a spacetime covector to its H* components w_{A A.} via the dual Pauli frame."""
    return np.einsum("l,lab->ab", np.asarray(w_lambda), DUAL_PAULI_FRAME)
