"""Slow, literal reference implementations used to cross-check the library.

Nothing here imports the package; elements are plain tuples of digits with the
first coordinate bit as the most significant bit of the digit index.
"""

from __future__ import annotations

import itertools
from math import comb

Z = -1


def all_elements(p, n):
    return itertools.product(range(p), repeat=1 << n)


def add(a, b, p):
    return tuple((x + y) % p for x, y in zip(a, b))


def lift(g, n_from, n_to):
    r = 1 << (n_to - n_from)
    return tuple(v for v in g for _ in range(r))


def orbit_label(T, p):
    """x with T - x equal to the smallest-bitmask member of T's translation orbit."""
    def mask(s):
        return sum(1 << i for i in s)
    orbit = {y: frozenset((t + y) % p for t in T) for y in range(p)}
    rep = min(orbit.values(), key=mask)
    for x in range(p):
        if frozenset((t - x) % p for t in T) == rep:
            return x
    raise AssertionError("translation action must be free")


def classify(g, p, levels):
    """Cell label of the digit tuple g under levels [(n_1, m_1), ...] (scales absolute)."""
    n1, m = levels[0]
    B = 1 << n1
    size = len(g) // B
    if len(levels) == 1:
        inner = list(g[::size]) if all(len(set(g[i * size:(i + 1) * size])) == 1 for i in range(B)) else None
        if inner is None:
            raise ValueError("element not at the partition's scale")
    else:
        rest = [(n - n1, mm) for n, mm in levels[1:]]
        inner = [classify(g[i * size:(i + 1) * size], p, rest) for i in range(B)]
    if Z in inner:
        return Z
    counts = [inner.count(v) for v in range(p)]
    above = {v for v in range(p) if p * counts[v] > B + p * m}
    below = {v for v in range(p) if p * counts[v] < B - p * m}
    if above | below != set(range(p)) or not above or len(above) == p:
        return Z
    return orbit_label(above, p)


def cell_counts(p, levels):
    out = {}
    for g in all_elements(p, levels[-1][0]):
        lab = classify(g, p, levels)
        out[lab] = out.get(lab, 0) + 1
    return out


def hamming_weight(g, centre=0):
    return sum(1 for v in g if v != centre)


def ball(p, n, k, centre=0):
    return [g for g in all_elements(p, n) if hamming_weight(g, centre) <= k]


def binomial_tail(B, lo):
    return sum(comb(B, j) for j in range(lo, B + 1))


def difference_set_full_xor(mask, T):
    """For p = 2 with lexicographic indexing, a - b has index idx(a) ^ idx(b)."""
    members = [i for i in range(T) if mask >> i & 1]
    return len({a ^ b for a in members for b in members}) == T


def difference_set(A, p):
    return {tuple((x - y) % p for x, y in zip(a, b)) for a in A for b in A}


def pairing(coeffs, g, p):
    return sum(c * v for c, v in zip(coeffs, g)) % p


def independent(rows, p):
    """Independence by brute force: no nontrivial combination vanishes."""
    d = len(rows)
    for lam in itertools.product(range(p), repeat=d):
        if any(lam) and all(sum(l * r[t] for l, r in zip(lam, rows)) % p == 0 for t in range(len(rows[0]))):
            return False
    return True
