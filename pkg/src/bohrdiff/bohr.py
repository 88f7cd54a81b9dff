"""Finite-index subgroups of G_p^(N) as kernels of linear functionals.

A subset S of G_p^(N) meets every coset of every subgroup of index at most
p^d exactly when every surjection onto F_p^d maps S onto F_p^d. The checks
here certify that statement for d <= d_max only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

from .field import (
    DEFAULT_BUDGET,
    GroupElement,
    _check_budget,
    as_rows,
    check_prime,
    digits_to_index,
    format_element,
    group_order,
    index_to_digits,
)
from .hamming import BallSpec, ball_array
from .report import CheckRecord


# -- linear algebra over F_p --------------------------------------------------

def rref_mod_p(matrix, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p and its pivot columns."""
    a = np.array(matrix, dtype=np.int64) % p
    a = np.atleast_2d(a)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank_mod_p(matrix, p: int) -> int:
    if np.size(matrix) == 0:
        return 0
    return len(rref_mod_p(matrix, p)[1])


# -- functionals ----------------------------------------------------------------

@dataclass(frozen=True)
class Functional:
    """g -> sum_t coeffs[t] * g[t] (mod p) on G_p^(N)."""

    p: int
    scale: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        check_prime(self.p)
        if len(self.coeffs) != 1 << self.scale:
            raise ValueError("functional needs one coefficient per digit")
        object.__setattr__(self, "coeffs", tuple(int(c) % self.p for c in self.coeffs))

    def __call__(self, g: GroupElement) -> int:
        return int(self.pair(as_rows([g], self.p, self.scale))[0])

    def pair(self, rows: np.ndarray) -> np.ndarray:
        return (np.asarray(rows, dtype=np.int64) @ np.array(self.coeffs, dtype=np.int64)) % self.p


@dataclass(frozen=True)
class FunctionalSystem:
    """d linearly independent functionals; the kernel has index p^d."""

    functionals: tuple[Functional, ...]
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fs = tuple(self.functionals)
        if not fs:
            raise ValueError("a system needs at least one functional")
        p, N = fs[0].p, fs[0].scale
        if any(f.p != p or f.scale != N for f in fs):
            raise ValueError("functionals must share prime and scale")
        mat = np.array([f.coeffs for f in fs], dtype=np.int64)
        if rank_mod_p(mat, p) != len(fs):
            raise ValueError("functionals are linearly dependent")
        object.__setattr__(self, "functionals", fs)
        object.__setattr__(self, "_matrix", mat)

    @classmethod
    def from_matrix(cls, p: int, N: int, rows) -> "FunctionalSystem":
        return cls(tuple(Functional(p, N, tuple(r)) for r in np.atleast_2d(rows)))

    @property
    def p(self) -> int:
        return self.functionals[0].p

    @property
    def scale(self) -> int:
        return self.functionals[0].scale

    @property
    def d(self) -> int:
        return len(self.functionals)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def apply(self, rows: np.ndarray) -> np.ndarray:
        """rho(g) for every row, as an (n, d) array."""
        return (np.asarray(rows, dtype=np.int64) @ self._matrix.T) % self.p

    def __call__(self, g: GroupElement) -> tuple[int, ...]:
        return tuple(int(v) for v in self.apply(as_rows([g], self.p, self.scale))[0])

    def preimage(self, v: Sequence[int]) -> GroupElement:
        """Some g with rho(g) = v (a coset representative)."""
        p = self.p
        aug = np.concatenate([self._matrix, np.array(v, dtype=np.int64)[:, None]], axis=1)
        red, pivots = rref_mod_p(aug, p)
        g = np.zeros(1 << self.scale, dtype=np.int64)
        for r, c in enumerate(pivots):
            g[c] = red[r, -1]
        return GroupElement(p, self.scale, g)

    def describe(self) -> str:
        return ";".join("".join(str(c) for c in f.coeffs) for f in self.functionals)


def is_reduced_basis(mat: np.ndarray, p: int) -> bool:
    """True when the rows, in some order, are the reduced echelon basis of their span."""
    red, _ = rref_mod_p(mat, p)
    return set(map(tuple, red.tolist())) == set(map(tuple, (np.asarray(mat) % p).tolist()))


def count_systems(p: int, N: int, d: int) -> int:
    return comb(group_order(p, N) - 1, d)


def enumerate_systems(p: int, N: int, d: int, dedup: bool = False,
                      budget: int | None = DEFAULT_BUDGET) -> Iterator[FunctionalSystem]:
    """Every unordered d-set of independent nonzero functionals on G_p^(N).

    With ``dedup`` only the row-reduced system of each kernel is produced.
    """
    p = check_prime(p)
    _check_budget(count_systems(p, N, d), budget, "functional systems")
    T = group_order(p, N)
    coeffs = index_to_digits(p, N, np.arange(1, T))
    for combo in itertools.combinations(range(T - 1), d):
        mat = coeffs[list(combo)].astype(np.int64)
        if rank_mod_p(mat, p) != d:
            continue
        if dedup and not is_reduced_basis(mat, p):
            continue
        yield FunctionalSystem.from_matrix(p, N, mat)


def image_of(members: Iterable[GroupElement] | np.ndarray, system: FunctionalSystem) -> set[tuple[int, ...]]:
    rows = as_rows(members, system.p, system.scale)
    return {tuple(int(v) for v in r) for r in system.apply(rows)}


# -- density up to an index bound ---------------------------------------------

@dataclass(frozen=True)
class DensityResult:
    dense: bool
    d_max: int
    system: FunctionalSystem | None = None
    missing: tuple[int, ...] | None = None
    systems_checked: int = 0

    def __bool__(self):
        return self.dense


def _indicator(members, p: int, N: int) -> np.ndarray:
    """Boolean indicator over G_p^(N) (lexicographic index order)."""
    T = group_order(p, N)
    if isinstance(members, np.ndarray) and members.dtype == bool and members.ndim == 1:
        if members.size != T:
            raise ValueError(f"indicator must have length {T}")
        return members
    ind = np.zeros(T, dtype=bool)
    rows = as_rows(members, p, N)
    if len(rows):
        ind[digits_to_index(p, rows)] = True
    return ind


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform: out[f] = sum_g values[g] (-1)^popcount(f & g)."""
    a = np.array(values, dtype=np.int64)
    n = a.size
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1).reshape(n)
        h *= 2
    return a


def _fourier_dense(ind: np.ndarray, N: int, d_max: int) -> DensityResult:
    """p = 2, d_max <= 2: coset counts read off the Walsh-Hadamard transform of S."""
    T = ind.size
    W = walsh_hadamard(ind.astype(np.int64))
    size = int(W[0])
    checked = 0

    def system(*fs):
        return FunctionalSystem.from_matrix(2, N, index_to_digits(2, N, np.array(fs)))

    # d = 1: f(s) takes value 0 on (|S| + W[f]) / 2 members and 1 on (|S| - W[f]) / 2
    hit = np.flatnonzero(np.abs(W[1:]) == size)
    checked += T - 1
    if hit.size:
        f = int(hit[0]) + 1
        return DensityResult(False, d_max, system(f), (0,) if W[f] < 0 else (1,), int(hit[0]) + 1)
    if d_max < 2:
        return DensityResult(True, d_max, systems_checked=checked)
    # with h3 = W[f1 ^ f2] the four value counts are (|S| +- h1 +- h2 +- h3) / 4,
    # so some value is missed iff |h2 + h3| = |S| + h1 or |h2 - h3| = |S| - h1
    W32 = W.astype(np.int32)
    idx = np.arange(T, dtype=np.int64)
    for f1 in range(1, T - 1):
        f2 = idx[f1 + 1:]
        h1 = int(W32[f1])
        h2, h3 = W32[f1 + 1:], W32[f2 ^ f1]
        bad = np.flatnonzero((np.abs(h2 + h3) == size + h1) | (np.abs(h2 - h3) == size - h1))
        if bad.size:
            b = int(bad[0])
            g2, g3 = int(h2[b]), int(h3[b])
            counts = {(0, 0): size + h1 + g2 + g3, (0, 1): size + h1 - g2 - g3,
                      (1, 0): size - h1 + g2 - g3, (1, 1): size - h1 - g2 + g3}
            vec = next(v for v, c in counts.items() if c == 0)
            return DensityResult(False, d_max, system(f1, int(f2[b])), vec, checked + b + 1)
        checked += f2.size
    return DensityResult(True, d_max, systems_checked=checked)


def _missing_codes(codes: np.ndarray, base: int) -> np.ndarray:
    """For each column of codes in [0, base), the smallest absent code or -1."""
    present = np.zeros((base, codes.shape[1]), dtype=bool)
    present[codes, np.arange(codes.shape[1])[None, :]] = True
    miss = ~present
    return np.where(miss.any(axis=0), miss.argmax(axis=0), -1)


def _direct_dense(ind: np.ndarray, p: int, N: int, d_max: int, budget) -> DensityResult:
    """Images of S under every system, in enumerate_systems order.

    Ranks 1 and 2 evaluate all functionals on S at once; higher ranks go
    system by system.
    """
    T = group_order(p, N)
    rows = index_to_digits(p, N, np.flatnonzero(ind)).astype(np.int64)
    coeffs = index_to_digits(p, N, np.arange(1, T)).astype(np.int64)
    checked = 0

    def fail(fs, code, d):
        vec = tuple(int(v) for v in np.unravel_index(code, (p,) * d))
        return DensityResult(False, d_max, FunctionalSystem.from_matrix(p, N, coeffs[list(fs)]), vec, checked)

    if d_max >= 1:
        _check_budget(T - 1, budget, "functional systems")
        vals = (rows @ coeffs.T) % p if len(rows) else np.zeros((0, T - 1), dtype=np.int64)
        miss = _missing_codes(vals, p) if len(rows) else np.zeros(T - 1, dtype=np.int64)
        bad = np.flatnonzero(miss >= 0)
        if bad.size:
            checked += int(bad[0]) + 1
            return fail([bad[0]], miss[bad[0]], 1)
        checked += T - 1
    if d_max >= 2:
        _check_budget(count_systems(p, N, 2), budget, "functional systems")
        # index (into coeffs) of c * f, to skip dependent pairs
        multiples = [digits_to_index(p, (c * coeffs) % p) - 1 for c in range(2, p)]
        for f1 in range(T - 2):
            f2 = np.arange(f1 + 1, T - 1)
            if multiples:
                dep = np.isin(f2, [int(m[f1]) for m in multiples])
                f2 = f2[~dep]
            if not f2.size:
                continue
            codes = vals[:, f1, None] * p + vals[:, f2]
            miss = _missing_codes(codes, p * p) if len(rows) else np.zeros(f2.size, dtype=np.int64)
            bad = np.flatnonzero(miss >= 0)
            if bad.size:
                checked += int(bad[0]) + 1
                return fail([f1, f2[bad[0]]], miss[bad[0]], 2)
            checked += f2.size
    for d in range(3, d_max + 1):
        target = p ** d
        for sysm in enumerate_systems(p, N, d, budget=budget):
            checked += 1
            seen = set(map(tuple, sysm.apply(rows).tolist()))
            if len(seen) < target:
                for v in itertools.product(range(p), repeat=d):
                    if v not in seen:
                        return DensityResult(False, d_max, sysm, v, checked)
    return DensityResult(True, d_max, systems_checked=checked)


def dense_upto(members, N: int, d_max: int, p: int | None = None, method: str = "auto",
               budget: int | None = DEFAULT_BUDGET) -> DensityResult:
    """Does S meet every coset of every subgroup of G_p^(N) of index <= p^d_max?

    ``members`` is a stream of GroupElements, a digit array, or a boolean
    indicator over the group. ``method`` is "direct" (enumerate systems),
    "fourier" (p = 2, d_max <= 2) or "auto".
    """
    if p is None:
        if isinstance(members, np.ndarray):
            raise ValueError("p is required for array input")
        members = list(members)
        if not members:
            raise ValueError("p is required for an empty member list")
        p = members[0].p
    p = check_prime(p)
    _check_budget(group_order(p, N), budget)
    ind = _indicator(members, p, N)
    if method == "auto":
        method = "fourier" if p == 2 and d_max <= 2 else "direct"
    if method == "fourier":
        if p != 2 or d_max > 2:
            raise ValueError("the Fourier route handles p = 2, d_max <= 2 only")
        return _fourier_dense(ind, N, d_max)
    if method == "direct":
        return _direct_dense(ind, p, N, d_max, budget)
    raise ValueError(f"unknown method {method!r}")


def contains_coset(D, N: int, d_max: int, p: int | None = None, method: str = "auto",
                   budget: int | None = DEFAULT_BUDGET) -> tuple[FunctionalSystem, GroupElement] | None:
    """A coset of a subgroup of index <= p^d_max lying inside D, or None.

    D contains such a coset exactly when its complement misses one.
    """
    if p is None:
        if isinstance(D, np.ndarray):
            raise ValueError("p is required for array input")
        D = list(D)
        p = D[0].p
    ind = _indicator(D, p, N)
    res = dense_upto(~ind, N, d_max, p=p, method=method, budget=budget)
    if res.dense:
        return None
    return res.system, res.system.preimage(res.missing)


def union_of_translated_balls(p: int, N: int, balls: Sequence[BallSpec], shift: int = 1,
                              budget: int | None = DEFAULT_BUDGET) -> np.ndarray:
    """Indicator over G_p^(N) of the union of U(n_i, k_i) + shift*1 (n_i <= N)."""
    ind = np.zeros(group_order(p, N), dtype=bool)
    for ball in balls:
        if ball.n > N:
            raise ValueError(f"ball scale {ball.n} exceeds ambient scale {N}")
        rows = np.repeat(ball_array(p, ball, centre=shift % p, budget=budget), 1 << (N - ball.n), axis=1)
        ind[digits_to_index(p, rows)] = True
    return ind


# -- generation facts for Hamming balls -----------------------------------------

def verify_hamming_generation(p: int, n: int, d: int,
                              budget: int | None = DEFAULT_BUDGET) -> list[CheckRecord]:
    """U(n,1) spans G_p^(n), is closed under scalars, its d-fold sums lie in
    U(n,d), and every rank-d system maps U(n,d) onto F_p^d."""
    p = check_prime(p)
    U1 = ball_array(p, BallSpec(n, 1), budget=budget).astype(np.int64)
    params = {"p": p, "n": n, "d": d}
    out = []

    rank = rank_mod_p(U1, p)
    out.append(CheckRecord("hamming.span", "hamming-ball-generation/(iii)", params, "exhaustive",
                           trials=1, violations=int(rank != 1 << n),
                           exact_values={"rank": rank, "dimension": 1 << n}))

    bad, trials = [], 0
    for c in range(p):
        w = ((c * U1) % p != 0).sum(axis=1)
        trials += len(U1)
        bad += [f"{c}*{format_element(GroupElement(p, n, U1[i]))}" for i in np.flatnonzero(w > 1)]
    out.append(CheckRecord("hamming.scalar_invariance", "hamming-ball-generation/(iv)", params, "exhaustive",
                           trials=trials, violations=len(bad), witnesses=bad[:3]))

    bad, trials = [], 0
    for r in range(1, d + 1):
        _check_budget(len(U1) ** r, budget, "sums")
        for combo in itertools.product(range(len(U1)), repeat=r):
            s = U1[list(combo)].sum(axis=0) % p
            trials += 1
            if (s != 0).sum() > r:
                bad.append(format_element(GroupElement(p, n, s)))
    out.append(CheckRecord("hamming.sum_closure", "hamming-ball-generation/(v)", params, "exhaustive",
                           trials=trials, violations=len(bad), witnesses=bad[:3]))

    ind = union_of_translated_balls(p, n, [BallSpec(n, d)], shift=0, budget=budget)
    res = dense_upto(ind, n, d, p=p, budget=budget)
    wit = [] if res.dense else [f"system={res.system.describe()} missing={res.missing}"]
    out.append(CheckRecord("hamming.surjective_image", "hamming-ball-density", params, "exhaustive",
                           trials=res.systems_checked, violations=int(not res.dense), witnesses=wit,
                           notes=[f"certified for subgroups of index <= {p}^{d} only"]))
    return out
