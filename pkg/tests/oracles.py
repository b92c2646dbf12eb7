"""Brute-force nested-loop evaluators used as independent references.

Everything here multiplies GrassmannElement entries one index assignment at a
time, in the written factor order, and never touches numpy einsum or the
antisymmetrisation used by the fast paths.
"""
import itertools

import numpy as np

from spinorcheck.grassmann import GrassmannElement


def elements(t):
    """Tensor -> dict index tuple -> GrassmannElement, via the stored ordered products."""
    out = {}
    for idx in np.ndindex(*t.shape):
        sub = t.data[idx]
        e = GrassmannElement()
        if t.degree == 0:
            e = GrassmannElement.scalar(complex(sub))
        else:
            for gens in zip(*np.nonzero(sub)):
                e = e + GrassmannElement.monomial([int(g) for g in gens], sub[gens])
        out[idx] = e
    return out


def loop_sum(spec, *tensors):
    """Scalar sum over every letter of a comma-separated spec, e.g. ``"lm,lab,b"``."""
    terms = spec.split(",")
    assert len(terms) == len(tensors)
    letters = sorted(set("".join(terms)))
    dims = {}
    for term, t in zip(terms, tensors):
        for ch, d in zip(term, t.shape):
            dims.setdefault(ch, d)
            assert dims[ch] == d
    tables = [elements(t) for t in tensors]
    total = GrassmannElement()
    for values in itertools.product(*(range(dims[ch]) for ch in letters)):
        val = dict(zip(letters, values))
        prod = GrassmannElement.scalar(1.0)
        for term, tab in zip(terms, tables):
            prod = prod * tab[tuple(val[ch] for ch in term)]
            if prod.is_zero():
                break
        total = total + prod
    return total


def as_element(t):
    """Rank-0 tensor from the fast path as a GrassmannElement."""
    return t.scalar() if t.degree else GrassmannElement.scalar(t.scalar())


def rel_diff(a, b):
    """max |a - b| over coefficients, relative to the larger of the two."""
    a = a if isinstance(a, GrassmannElement) else GrassmannElement.scalar(a)
    b = b if isinstance(b, GrassmannElement) else GrassmannElement.scalar(b)
    scale = max(a.max_abs(), b.max_abs(), 1e-300)
    return (a - b).max_abs() / scale


def i_family_loops(W, phi, phibar):
    """The four gauge-Higgs scalars by explicit six-fold loops."""
    g = np.diag([1.0, -1.0, -1.0, -1.0])
    w, p, pb = W.data, phi.data, phibar.data
    out = [0j, 0j, 0j, 0j]
    for l, m in itertools.product(range(4), repeat=2):
        if g[l, m] == 0:
            continue
        for a, b, c in itertools.product(range(2), repeat=3):
            out[0] += g[l, m] * w[l, a, b] * w[m, c, a] * p[b] * pb[c]
            out[1] += g[l, m] * w[l, a, b] * w[m, c, c] * p[b] * pb[a]
            out[2] += g[l, m] * w[l, a, a] * w[m, c, c] * p[b] * pb[b]
            out[3] += g[l, m] * w[l, a, b] * w[m, b, a] * p[c] * pb[c]
    return out
