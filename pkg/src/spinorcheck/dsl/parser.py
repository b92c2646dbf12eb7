"""Index-notation expressions: grammar, AST, printer and symbol tables.

Grammar (LL(1))::

    expression := "0" | term (("+" | "-") term)* ["->" index*]
    term       := ["+" | "-"] [rational ["*"]] factor+
    factor     := NAME group*
    group      := ("^" | "_") (index | "{" index* "}")
    index      := LETTER ["'"]

Index letters are bound to the declared slots of a symbol in order, so the
``^``/``_`` markers only group letters; the variance of each slot comes from
the symbol table.  A trailing apostrophe marks a dotted-spinor index.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from ..tensor import DOWN, UP, Slot, Species, slots

PARITIES = ("even", "odd")


class ExpressionError(ValueError):
    """Parse or validation failure, located by byte offset into the UTF-8 source."""

    def __init__(self, message: str, offset: int | None = None, text: str | None = None):
        self.offset = offset
        self.detail = message
        where = ""
        if offset is not None:
            where = f" at byte {offset}"
            if text is not None:
                raw = text.encode()
                caret = raw[max(0, offset - 20):offset + 20].decode(errors="replace")
                where += f" (near {caret!r})"
        super().__init__(message + where)


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    slots: tuple[Slot, ...]
    parity: str = "even"

    def __post_init__(self):
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}")


def conjugate_slots(decl_slots: Iterable[Slot]) -> tuple[Slot, ...]:
    """Slots of the conjugate symbol: spinor <-> dotted, isospin variance flips."""
    out = []
    for s in decl_slots:
        if s.species is Species.SPINOR:
            out.append(Slot(Species.DOTTED, s.variance))
        elif s.species is Species.DOTTED:
            out.append(Slot(Species.SPINOR, s.variance))
        elif s.species is Species.ISOSPIN:
            out.append(s.flipped())
        else:
            out.append(s)
    return tuple(out)


class SymbolTable:
    """Name -> declaration; ``declare(..., conjugate=True)`` also adds ``<name>bar``."""

    def __init__(self):
        self._decls: dict[str, SymbolDecl] = {}

    def declare(self, name: str, spec: str | Iterable[Slot], parity: str = "even",
                conjugate: bool = False) -> "SymbolTable":
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name):
            raise ValueError(f"symbol names are ASCII identifiers, got {name!r}")
        sl = slots(spec) if isinstance(spec, str) else tuple(spec)
        self._decls[name] = SymbolDecl(name, sl, parity)
        if conjugate:
            self._decls[name + "bar"] = SymbolDecl(name + "bar", conjugate_slots(sl), parity)
        return self

    def __getitem__(self, name: str) -> SymbolDecl:
        return self._decls[name]

    def __contains__(self, name: str) -> bool:
        return name in self._decls

    def names(self) -> list[str]:
        return sorted(self._decls)


def default_symbols(statistics: str = "bosonic") -> SymbolTable:
    """Symbols used by the invariant families; Omega is odd for fermionic statistics."""
    odd = "odd" if statistics == "fermionic" else "even"
    table = SymbolTable()
    table.declare("g", "t^ t^").declare("gdown", "t_ t_")
    table.declare("W", "t_ i^ i_")
    table.declare("phi", "i^", conjugate=True)
    table.declare("eps", "i_ i_").declare("epsup", "i^ i^")
    table.declare("epsS", "s_ s_").declare("epsSup", "s^ s^")
    table.declare("epsD", "d_ d_").declare("epsDup", "d^ d^")
    table.declare("Omega", "t_ i^", odd, conjugate=True)
    table.declare("Phi", "i^ d^ d_", conjugate=True)
    return table


# -- AST ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Factor:
    symbol: str
    indices: tuple[str, ...]
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Term:
    coefficient: Fraction
    factors: tuple[Factor, ...]


@dataclass(frozen=True)
class Expression:
    terms: tuple[Term, ...]
    free: tuple[str, ...] = ()
    #: species of every index letter, filled by validation
    species: tuple[tuple[str, Species], ...] = field(default=(), compare=False)

    def letter_species(self) -> dict[str, Species]:
        return dict(self.species)


# -- lexer ----------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<op>[-+*^_{}'])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()), text)
        if m.lastgroup != "ws":
            kind = m.lastgroup if m.lastgroup != "op" else m.group()
            out.append(_Tok(kind, m.group(), len(text[:pos].encode())))
        pos = m.end()
    out.append(_Tok("end", "", len(text.encode())))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str | None = None) -> _Tok:
        t = self.tok
        if kind is not None and t.kind != kind:
            want = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if t.kind == "end" else repr(t.text)
            raise ExpressionError(f"expected {want}, found {got}", t.offset, self.text)
        self.i += 1
        return t

    def expression(self) -> tuple[list[tuple[Fraction, list[Factor]]], list[tuple[str, int]]]:
        terms = []
        if self.tok.kind == "number" and self.tok.text == "0" and self.toks[self.i + 1].kind in ("end", "arrow"):
            self.take()
        else:
            terms.append(self.term(first=True))
            while self.tok.kind in ("+", "-"):
                terms.append(self.term(first=False))
        free = []
        if self.tok.kind == "arrow":
            self.take()
            while self.tok.kind == "name":
                free += self.letters_in_name(self.take())
        self.take("end")
        return terms, free

    def term(self, first: bool) -> tuple[Fraction, list[Factor]]:
        sign = 1
        if self.tok.kind in ("+", "-"):
            sign = -1 if self.take().kind == "-" else 1
        elif not first:
            raise ExpressionError("expected '+' or '-' between terms", self.tok.offset, self.text)
        coeff = Fraction(1)
        if self.tok.kind == "number":
            t = self.take()
            try:
                coeff = Fraction(t.text)
            except ZeroDivisionError:
                raise ExpressionError("zero denominator", t.offset, self.text) from None
            if self.tok.kind == "*":
                self.take()
        factors = []
        while self.tok.kind == "name":
            factors.append(self.factor())
        if not factors:
            raise ExpressionError("a term needs at least one factor", self.tok.offset, self.text)
        return sign * coeff, factors

    def factor(self) -> tuple[Factor, list[tuple[str, int]]]:
        name = self.take("name")
        letters: list[tuple[str, int]] = []
        while self.tok.kind in ("^", "_"):
            self.take()
            if self.tok.kind == "{":
                self.take()
                while self.tok.kind == "name":
                    letters += self.letters_in_name(self.take())
                self.take("}")
            else:
                t = self.take("name")
                if len(t.text) != 1:
                    raise ExpressionError("ungrouped index must be a single letter; use braces",
                                          t.offset, self.text)
                letters += self.letters_in_name(t)
        return Factor(name.text, tuple(x for x, _ in letters), name.offset), letters

    def letters_in_name(self, t: _Tok) -> list[tuple[str, int]]:
        """Split a run like ``ab`` into letters; an apostrophe after it dots the last letter."""
        if not t.text.isalpha():
            raise ExpressionError(f"index names are single letters, got {t.text!r}", t.offset, self.text)
        out = [(ch, t.offset + k) for k, ch in enumerate(t.text)]
        if self.tok.kind == "'":
            self.take()
            ch, off = out[-1]
            out[-1] = (ch + "'", off)
        return out


def parse_expression(text: str, table: SymbolTable | None = None, free: Iterable[str] = ()) -> Expression:
    """Parse and validate an index expression.

    Every index letter must appear exactly twice in a term (once on an up slot,
    once on a down slot of the same species) unless declared free, either via
    ``free`` or a trailing ``-> letters`` clause.
    """
    table = table or default_symbols()
    parser = _Parser(text)
    raw_terms, raw_free = parser.expression()
    free_letters = tuple(dict.fromkeys([x for x, _ in raw_free] + list(free)))
    species: dict[str, Species] = {}
    first_seen: dict[str, int] = {}
    terms = []
    for coeff, factors in raw_terms:
        built = []
        # letter -> list of (slot, offset)
        uses: dict[str, list[tuple[Slot, int]]] = {}
        for fac, letters in factors:
            if fac.symbol not in table:
                raise ExpressionError(f"unknown symbol {fac.symbol!r}", fac.offset, text)
            decl = table[fac.symbol]
            if len(letters) != len(decl.slots):
                raise ExpressionError(f"{fac.symbol} takes {len(decl.slots)} indices, got {len(letters)}",
                                      fac.offset, text)
            for (letter, off), slot in zip(letters, decl.slots):
                dotted = letter.endswith("'")
                if dotted != (slot.species is Species.DOTTED):
                    raise ExpressionError(
                        f"index {letter!r} sits on a {slot.species.label} slot of {fac.symbol}"
                        + ("; dotted indices need a trailing apostrophe" if slot.species is Species.DOTTED else ""),
                        off, text)
                known = species.setdefault(letter, slot.species)
                first_seen.setdefault(letter, off)
                if known is not slot.species:
                    raise ExpressionError(f"index {letter!r} used as {known.label} and as {slot.species.label}",
                                          off, text)
                uses.setdefault(letter, []).append((slot, off))
            built.append(fac)
        for letter, occ in uses.items():
            if letter in free_letters:
                if len(occ) != 1:
                    raise ExpressionError(f"free index {letter!r} must appear exactly once per term",
                                          occ[1][1], text)
                continue
            if len(occ) == 1:
                raise ExpressionError(f"index {letter!r} appears once; declare it free or contract it",
                                      occ[0][1], text)
            if len(occ) > 2:
                raise ExpressionError(f"index {letter!r} appears {len(occ)} times", occ[2][1], text)
            (a, _), (b, off) = occ
            if a.variance == b.variance:
                raise ExpressionError(f"index {letter!r} appears twice in the same variance ({a.variance})",
                                      off, text)
        missing = [x for x in free_letters if x not in uses]
        if missing:
            raise ExpressionError(f"free index {missing[0]!r} missing from a term", built[0].offset, text)
        terms.append(Term(coeff, tuple(built)))
    for letter in free_letters:
        if letter not in species:
            raise ExpressionError(f"free index {letter!r} never used", None, text)
    return Expression(tuple(terms), free_letters, tuple(sorted(species.items())))


# -- printer -------------------------------------------------------------------------


def _format_factor(fac: Factor, decl: SymbolDecl) -> str:
    out = fac.symbol
    run_var, run = None, []

    def flush():
        nonlocal out
        if run:
            out += ("^" if run_var == UP else "_") + "{" + " ".join(run) + "}"

    for letter, slot in zip(fac.indices, decl.slots):
        if slot.variance != run_var:
            flush()
            run_var, run = slot.variance, []
        run.append(letter)
    flush()
    return out


def format_expression(expr: Expression, table: SymbolTable | None = None) -> str:
    """Canonical text; markers follow the declared variances so it always reparses."""
    table = table or default_symbols()
    if not expr.terms:
        text = "0"
    else:
        parts = []
        for k, term in enumerate(expr.terms):
            c = term.coefficient
            sign = "-" if c < 0 else ("+" if k else "")
            mag = abs(c)
            lead = "" if mag == 1 else f"{mag} "
            body = " ".join(_format_factor(f, table[f.symbol]) for f in term.factors)
            parts.append(f"{sign} {lead}{body}".strip() if sign else f"{lead}{body}")
        text = " ".join(parts)
    if expr.free:
        text += " -> " + " ".join(expr.free)
    return text


__all__ = ["ExpressionError", "SymbolDecl", "SymbolTable", "default_symbols", "conjugate_slots",
           "Factor", "Term", "Expression", "parse_expression", "format_expression", "DOWN", "UP"]
