"""Vertex extraction for the Higgs sector.

Two independent routes:

* symbolic: the component formulas for nabla phi are expanded with sympy after
  the substitution d -> i p, and grouped into monomials in the fluctuation fields;
* numeric: the Lagrangian is evaluated through the gauge-matrix action on the
  doublet, and each monomial's Taylor coefficient is read off by sampling the
  field amplitudes on roots of unity (a discrete Cauchy integral).
"""
from __future__ import annotations

import csv
import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .ew import EWParams, broken_frame
from .sampling import stream

TERMS = ("higgs-kinetic", "higgs-potential", "yukawa")

q, s, c, m, lam = sp.symbols("q sin cos m lambda", positive=True)
H, phi0, phip, phim = sp.symbols("H phi0 phi_plus phi_minus", real=True)
SCALAR_SYMBOLS = {"H": H, "phi0": phi0, "phi_plus": phip, "phi_minus": phim}
VECTOR_FIELDS = ("A", "Z", "W_plus", "W_minus")
FERMION_FIELDS = ("PsiLbar1", "PsiLbar2", "PsiR", "PsiRbar", "PsiL1", "PsiL2")
_CONJ_SWAP = {"phi_plus": "phi_minus", "phi_minus": "phi_plus",
              "W_plus": "W_minus", "W_minus": "W_plus"}
_MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class VertexEntry:
    legs: tuple[str, ...]
    coefficient: sp.Expr
    structure: str

    def numeric(self, params: EWParams) -> complex:
        return complex(self.coefficient.subs({
            q: params.q, s: np.sin(params.theta), c: np.cos(params.theta),
            m: params.m, lam: params.lam}))


@dataclass
class VertexTable:
    term: str
    entries: list[VertexEntry] = field(default_factory=list)

    def leg_sets(self) -> list[tuple[str, ...]]:
        return sorted({e.legs for e in self.entries})

    def lookup(self, legs) -> list[VertexEntry]:
        key = tuple(sorted(legs))
        return [e for e in self.entries if e.legs == key]

    def rows(self) -> list[dict]:
        out = []
        for e in self.entries:
            for term in sp.Add.make_args(sp.expand(e.coefficient)):
                num, den, tags = monomial_tags(term)
                out.append({"legs": " ".join(e.legs), "coefficient-numerator": num,
                            "coefficient-denominator": den, "trig-power tags": tags,
                            "index-structure tag": e.structure})
        return out

    def to_csv(self, path) -> None:
        rows = self.rows()
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["legs", "coefficient-numerator", "coefficient-denominator",
                                                    "trig-power tags", "index-structure tag"])
            writer.writeheader()
            writer.writerows(rows)

    def as_json(self) -> list[dict]:
        return [{"legs": list(e.legs), "coefficient": str(e.coefficient), "structure": e.structure}
                for e in self.entries]


_TAG_NAMES = {q: "q", s: "sin", c: "cos", m: "m", lam: "lambda", sp.I: "I"}


def monomial_tags(term: sp.Expr) -> tuple[int, int, str]:
    """Split a monomial into rational numerator, denominator and power tags."""
    coeff, rest = term.as_coeff_Mul()
    coeff = sp.Rational(coeff)
    tags = []
    for f in sp.Mul.make_args(rest):
        if f == 1:
            continue
        base, exp = (sp.I, 1) if f == sp.I else f.as_base_exp()
        if base == 2 and exp.is_Rational and exp.q == 2:
            tags.append(f"sqrt2^{exp.p}")
        elif base in _TAG_NAMES:
            tags.append(f"{_TAG_NAMES[base]}^{exp}")
        else:
            raise ValueError(f"unexpected factor {f} in vertex coefficient")
    return int(coeff.p), int(coeff.q), " ".join(sorted(tags))


# -- symbolic route -------------------------------------------------------------


def _nabla_components() -> list[dict[str, sp.Expr]]:
    """Component formulas for nabla phi^1, nabla phi^2 as {label: coefficient}.

    Labels ``d:X`` stand for the derivative of field X, other labels for gauge covectors.
    """
    rad = m + H + sp.I * phi0
    first = {"d:H": sp.Integer(1), "d:phi0": sp.I,
             "Z": -sp.I / 2 * q / c * rad,
             "W_minus": -sp.I / sp.sqrt(2) * q * phip}
    second = {"d:phi_plus": sp.Integer(1),
              "A": -sp.I * s * q * phip,
              "Z": sp.I / 2 * (c ** 2 - s ** 2) / c * q * phip,
              "W_plus": -sp.I / sp.sqrt(2) * q * rad}
    return [first, second]


def _conjugate(vec: dict[str, sp.Expr]) -> dict[str, sp.Expr]:
    swap = {phip: phim, phim: phip}
    out = {}
    for label, coeff in vec.items():
        if label.startswith("d:"):
            name = label[2:]
            new = "d:" + _CONJ_SWAP.get(name, name)
        else:
            new = _CONJ_SWAP.get(label, label)
        out[new] = sp.conjugate(coeff).xreplace(swap)
    return out


def _substitute_momenta(vec: dict[str, sp.Expr]) -> dict[str, sp.Expr]:
    out: dict[str, sp.Expr] = {}
    for label, coeff in vec.items():
        if label.startswith("d:"):
            name = label[2:]
            key = "p_" + name
            out[key] = out.get(key, 0) + coeff * sp.I * SCALAR_SYMBOLS[name]
        else:
            out[label] = out.get(label, 0) + coeff
    return out


def _structure_key(a: str, b: str) -> str:
    x, y = sorted((a, b))
    return f"g({x},{y})"


def _symbolic_kinetic() -> dict[str, sp.Expr]:
    total: dict[str, sp.Expr] = {}
    for comp in _nabla_components():
        right = _substitute_momenta(comp)
        left = _substitute_momenta(_conjugate(comp))
        for (la, ca), (lb, cb) in itertools.product(left.items(), right.items()):
            key = _structure_key(la, lb)
            total[key] = total.get(key, 0) + ca * cb
    return total


def _symbolic_potential() -> dict[str, sp.Expr]:
    norm = (m + H + sp.I * phi0) * (m + H - sp.I * phi0) + phip * phim
    return {"1": lam * (2 * m ** 2 * norm - norm ** 2)}


def _symbolic_yukawa() -> dict[str, sp.Expr]:
    up = [m + H + sp.I * phi0, phip]
    down = [m + H - sp.I * phi0, phim]
    return {
        "<PsiLbar1,PsiR>": -up[0], "<PsiLbar2,PsiR>": -up[1],
        "<PsiRbar,PsiL1>": -down[0], "<PsiRbar,PsiL2>": -down[1],
    }


def _structure_legs(structure: str) -> list[str]:
    if structure == "1":
        return []
    inner = structure[structure.index("(") + 1 if "(" in structure else 1:-1]
    return [x for x in inner.split(",") if not x.startswith("p_")]


def symbolic_expansion(term: str) -> VertexTable:
    builders = {"higgs-kinetic": _symbolic_kinetic, "higgs-potential": _symbolic_potential,
                "yukawa": _symbolic_yukawa}
    if term not in builders:
        raise ValueError(f"unknown Lagrangian term {term!r}; choose from {', '.join(TERMS)}")
    gens = [H, phi0, phip, phim]
    names = ["H", "phi0", "phi_plus", "phi_minus"]
    table = VertexTable(term)
    for structure, expr in sorted(builders[term]().items()):
        poly = sp.Poly(sp.expand(expr), *gens)
        for powers, coeff in poly.terms():
            coeff = sp.expand(coeff)
            if coeff == 0:
                continue
            legs = [n for n, k in zip(names, powers) for _ in range(k)] + _structure_legs(structure)
            table.entries.append(VertexEntry(tuple(sorted(legs)), coeff, structure))
    table.entries.sort(key=lambda e: (len(e.legs), e.legs, e.structure))
    return table


# -- numeric route ---------------------------------------------------------------


def _frame_action(vals: dict, params: EWParams) -> np.ndarray:
    """(i/2) q (W - Tr W) per batch point and spacetime index, shape (B, 4, 2, 2)."""
    frame = broken_frame(params.theta).matrices()
    comps = np.stack([vals[k] for k in VECTOR_FIELDS], axis=1)  # (B, 4 fields, 4 lambda)
    w = 0.5j * params.q * np.einsum("bkl,kxy->blxy", comps, frame)
    tr = np.einsum("blxx->bl", w)
    return w - tr[..., None, None] * np.eye(2)


def numeric_lagrangian(term: str, vals: dict, momenta: dict, params: EWParams) -> np.ndarray:
    """Batched evaluation of a Lagrangian term by the matrix route."""
    phi = np.stack([params.m + vals["H"] + 1j * vals["phi0"], vals["phi_plus"]], axis=1)
    phibar = np.stack([params.m + vals["H"] - 1j * vals["phi0"], vals["phi_minus"]], axis=1)
    if term == "higgs-potential":
        norm = np.sum(phi * phibar, axis=1)
        return params.lam * (2 * params.m ** 2 * norm - norm ** 2)
    if term == "yukawa":
        psi_lbar = np.stack([vals["PsiLbar1"], vals["PsiLbar2"]], axis=1)  # (B, alpha, A)
        psi_l = np.stack([vals["PsiL1"], vals["PsiL2"]], axis=1)
        return -(np.einsum("baA,ba,bA->b", psi_lbar, phi, vals["PsiR"])
                 + np.einsum("bD,ba,baD->b", vals["PsiRbar"], phibar, psi_l))
    if term != "higgs-kinetic":
        raise ValueError(f"unknown Lagrangian term {term!r}")
    p = momenta
    d_phi = np.stack([
        1j * np.outer(vals["H"], p["H"]) - np.outer(vals["phi0"], p["phi0"]),
        1j * np.outer(vals["phi_plus"], p["phi_plus"]),
    ], axis=1)
    d_phibar = np.stack([
        1j * np.outer(vals["H"], p["H"]) + np.outer(vals["phi0"], p["phi0"]),
        1j * np.outer(vals["phi_minus"], p["phi_minus"]),
    ], axis=1)
    act = _frame_action(vals, params)
    nab = d_phi - np.einsum("blxy,by->bxl", act, phi)
    nab_bar = d_phibar + np.einsum("blyx,by->bxl", act, phibar)
    return np.einsum("lm,bal,bam->b", _MINKOWSKI, nab_bar, nab)


def _field_kind(name: str) -> str:
    if name in SCALAR_SYMBOLS:
        return "scalar"
    if name in VECTOR_FIELDS:
        return "vector"
    return "spinor"


def _fields_for(term: str) -> tuple[str, ...]:
    if term == "yukawa":
        return tuple(SCALAR_SYMBOLS) + FERMION_FIELDS
    if term == "higgs-potential":
        return tuple(SCALAR_SYMBOLS)
    return tuple(SCALAR_SYMBOLS) + VECTOR_FIELDS


def taylor_coefficient(term: str, legs, directions: dict, momenta: dict, params: EWParams,
                       degree: int = 4) -> complex:
    """Coefficient of prod t_f^{n_f} in the term with field f set to t_f * direction_f."""
    counts = Counter(legs)
    names = sorted(counts)
    order = degree + 1
    roots = np.exp(2j * np.pi * np.arange(order) / order)
    grid = np.array(list(itertools.product(range(order), repeat=len(names))), dtype=int)
    grid = grid.reshape(max(len(grid), 1), len(names))
    b = grid.shape[0]
    vals = {}
    for f in _fields_for(term):
        kind = _field_kind(f)
        shape = (b,) if kind == "scalar" else (b, 4 if kind == "vector" else 2)
        vals[f] = np.zeros(shape, dtype=complex)
    weight = np.ones(b, dtype=complex)
    for j, f in enumerate(names):
        t = roots[grid[:, j]]
        vals[f] = t if _field_kind(f) == "scalar" else np.outer(t, directions[f])
        weight = weight * t ** (-counts[f])
    values = numeric_lagrangian(term, vals, momenta, params)
    return complex(np.sum(values * weight) / b)


def structure_value(structure: str, directions: dict, momenta: dict) -> complex:
    if structure == "1":
        return 1.0
    a, b = structure[structure.index("(") + 1 if "(" in structure else 1:-1].split(",")
    if structure.startswith("<"):
        return complex(directions[a] @ directions[b])

    def vec(label):
        return momenta[label[2:]] if label.startswith("p_") else directions[label]

    return complex(vec(a) @ _MINKOWSKI @ vec(b))


@dataclass(frozen=True)
class VertexValidation:
    max_rel_error: float
    per_legs: dict
    missing: list
    completeness_residual: float


def validate_table(table: VertexTable, params: EWParams, seed: int = 0, completeness: bool = True) -> VertexValidation:
    """Compare every leg set's predicted coefficient with the numeric Taylor coefficient."""
    rng = stream(seed, 0, "vertices:" + table.term)
    fields = _fields_for(table.term)
    directions = {f: rng.normal(size=4 if _field_kind(f) == "vector" else 2)
                  + 1j * rng.normal(size=4 if _field_kind(f) == "vector" else 2)
                  for f in fields if _field_kind(f) != "scalar"}
    momenta = {f: rng.normal(size=4) for f in SCALAR_SYMBOLS}
    per_legs = {}
    worst = 0.0
    typical = 0.0
    for legs in table.leg_sets():
        parts = [e.numeric(params) * structure_value(e.structure, directions, momenta) for e in table.lookup(legs)]
        predicted = sum(parts)
        measured = taylor_coefficient(table.term, legs, directions, momenta, params)
        scale = max(sum(abs(x) for x in parts), 1e-300)
        err = abs(measured - predicted) / scale
        per_legs[legs] = err
        worst = max(worst, err)
        typical = max(typical, scale)
    missing = []
    leak = 0.0
    if completeness:
        known = set(table.leg_sets())
        for k in range(0, 5):
            for legs in itertools.combinations_with_replacement(fields, k):
                key = tuple(sorted(legs))
                if key in known:
                    continue
                val = abs(taylor_coefficient(table.term, key, directions, momenta, params))
                leak = max(leak, val / max(typical, 1e-300))
                if val > 1e-8 * typical:
                    missing.append(key)
    return VertexValidation(worst, per_legs, missing, leak)


def extract_vertices(term: str, params: EWParams | None = None, validate: bool = True, seed: int = 0,
                     tol: float = 1e-8) -> VertexTable:
    """Expand a Lagrangian term into vertices; with ``validate`` every coefficient is cross-checked."""
    params = params or EWParams()
    table = symbolic_expansion(term)
    if validate:
        report = validate_table(table, params, seed=seed, completeness=False)
        if report.max_rel_error > tol:
            bad = max(report.per_legs, key=report.per_legs.get)
            raise ArithmeticError(f"vertex {bad} disagrees with numerical differentiation "
                                  f"(relative error {report.max_rel_error:.3g})")
    return table
