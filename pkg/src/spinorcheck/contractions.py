"""Enumeration of perfect-matching contraction schemes over groups of slots."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

EPS_PAIR = "eps"
DELTA_PAIR = "delta"
METRIC_PAIR = "g"

#: group modes: all pairs through the symplectic form, or the pair holding the
#: group's first slot through a delta and the rest through the symplectic form
GROUP_MODES = ("eps", "delta-eps", "g")


@dataclass(frozen=True)
class Pairing:
    first: str
    second: str
    obj: str

    def __str__(self):
        if self.obj == DELTA_PAIR:
            return f"delta({self.first},{self.second})"
        return f"{self.obj}^({self.first}{self.second})"


@dataclass(frozen=True)
class ContractionScheme:
    pairings: tuple[Pairing, ...]

    def slots(self) -> list[str]:
        return [x for p in self.pairings for x in (p.first, p.second)]

    def __str__(self):
        return " ".join(map(str, self.pairings))


class OddGroupError(ValueError):
    pass


def perfect_matchings(items: Sequence) -> list[list[tuple]]:
    """All perfect matchings, lexicographic in slot positions."""
    items = list(items)
    if not items:
        return [[]]
    head, rest = items[0], items[1:]
    out = []
    for k, partner in enumerate(rest):
        for tail in perfect_matchings(rest[:k] + rest[k + 1:]):
            out.append([(head, partner)] + tail)
    return out


def _is_odd(order: Sequence[int]) -> bool:
    inv = sum(1 for i, j in itertools.combinations(range(len(order)), 2) if order[i] > order[j])
    return bool(inv & 1)


def _orient(group: Sequence[str], matching: list[tuple], mode: str) -> tuple[Pairing, ...]:
    pos = {x: i for i, x in enumerate(group)}
    flat = [pos[x] for pair in matching for x in pair]
    pairs = [list(p) for p in matching]
    objs = [DELTA_PAIR if (mode == "delta-eps" and k == 0) else (METRIC_PAIR if mode == "g" else EPS_PAIR)
            for k in range(len(pairs))]
    if mode != "g" and _is_odd(flat):
        # positive-permutation convention: flip the first antisymmetric pair
        k = next(i for i, o in enumerate(objs) if o == EPS_PAIR)
        pairs[k].reverse()
    return tuple(Pairing(a, b, o) for (a, b), o in zip(pairs, objs))


def enumerate_pair_contractions(groups: Sequence[Sequence[str]],
                                pairing_objects: Sequence[str] | str = "eps") -> list[ContractionScheme]:
    """Cartesian product over groups of the oriented perfect matchings of each group.

    >>> [str(s) for s in enumerate_pair_contractions([list("ABCD")])]
    ['eps^(AB) eps^(CD)', 'eps^(CA) eps^(BD)', 'eps^(AD) eps^(BC)']
    """
    if isinstance(pairing_objects, str):
        pairing_objects = [pairing_objects] * len(groups)
    if len(pairing_objects) != len(groups):
        raise ValueError("one pairing mode per group is required")
    per_group = []
    for group, mode in zip(groups, pairing_objects):
        if mode not in GROUP_MODES:
            raise ValueError(f"unknown pairing mode {mode!r}")
        if len(group) % 2:
            raise OddGroupError(f"group {list(group)} has an odd number of slots")
        if len(set(group)) != len(group):
            raise ValueError(f"group {list(group)} repeats a slot label")
        per_group.append([_orient(group, m, mode) for m in perfect_matchings(group)])
    return [ContractionScheme(tuple(p for part in combo for p in part))
            for combo in itertools.product(*per_group)]


def parse_slot_spec(spec: str) -> tuple[list[list[str]], list[str]]:
    """Parse ``"A,B,C,D;delta-eps:A',B',C',D'"`` into groups and modes."""
    groups, modes = [], []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        mode = "eps"
        if ":" in chunk:
            mode, chunk = chunk.split(":", 1)
            mode = mode.strip()
        labels = [x.strip() for x in chunk.replace(" ", ",").split(",") if x.strip()]
        groups.append(labels)
        modes.append(mode)
    if not groups:
        raise ValueError("empty slot specification")
    return groups, modes
