"""Bias patterns and the iterated partitions of G_p^(n_l).

Cell labels are plain integers: ``x`` in ``range(p)`` for the cell P_x and
``Z`` (= -1) for the leftover cell. All thresholds are compared exactly: a
count ``c`` over ``B`` cylinders exceeds ``B/p + m`` iff ``p*c > B + p*m``.
"""

from __future__ import annotations

import bisect
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Sequence

import numpy as np

from .field import (
    BudgetExceeded,
    GroupElement,
    at_scale,
    blocks,
    check_prime,
    digit_dtype,
)

Z = -1

DEFAULT_MAX_DIGITS = 200_000
DEFAULT_PROFILE_BUDGET = 1 << 18


class VacuousLevelWarning(UserWarning):
    pass


# -- subset classes -----------------------------------------------------------

def mask_of(S: Iterable[int]) -> int:
    m = 0
    for s in S:
        m |= 1 << int(s)
    return m


def set_of(mask: int, p: int) -> frozenset[int]:
    return frozenset(i for i in range(p) if mask >> i & 1)


def translate_mask(mask: int, y: int, p: int) -> int:
    y %= p
    full = (1 << p) - 1
    return ((mask << y) | (mask >> (p - y))) & full


@dataclass(frozen=True)
class SubsetClassFamily:
    p: int
    classes: tuple[frozenset[int], ...]   # classes[x] = bitmasks of the subsets in S_x
    label_of_mask: tuple[int, ...]        # mask -> x, or Z for the empty and full masks

    def subsets(self, x: int) -> list[frozenset[int]]:
        return [set_of(mk, self.p) for mk in sorted(self.classes[x % self.p])]

    def size_profile(self) -> Counter:
        """How many subsets of each cardinality S_0 contains."""
        return Counter(bin(mk).count("1") for mk in self.classes[0])


@lru_cache(maxsize=None)
def subset_classes(p: int) -> SubsetClassFamily:
    """Translation-equivariant classes S_0..S_{p-1} of nonempty proper subsets.

    Each translation orbit contributes its minimal-bitmask member to S_0 and
    that member translated by x to S_x.
    """
    p = check_prime(p)
    full = (1 << p) - 1
    label = [Z] * (1 << p)
    classes: list[set[int]] = [set() for _ in range(p)]
    for mk in range(1, full):
        if label[mk] != Z:
            continue
        orbit = [translate_mask(mk, y, p) for y in range(p)]
        if len(set(orbit)) != p:
            raise ValueError(f"orbit of size {len(set(orbit))} for p={p}")
        rep = min(orbit)
        for y in range(p):
            t = translate_mask(rep, y, p)
            label[t] = y
            classes[y].add(t)
    return SubsetClassFamily(p, tuple(frozenset(c) for c in classes), tuple(label))


# -- partition specs ------------------------------------------------------------

@dataclass(frozen=True)
class PartitionSpec:
    """Levels (n_1, m_1), ..., (n_l, m_l) with n_i strictly increasing."""

    p: int
    levels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        check_prime(self.p)
        levels = tuple((int(n), int(m)) for n, m in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise ValueError("a partition spec needs at least one level")
        prev = -1
        for n, m in levels:
            if n <= prev:
                raise ValueError(f"scales must be non-negative and strictly increasing: {levels}")
            if m < 0:
                raise ValueError(f"margins must be non-negative: {levels}")
            prev = n
        bad = self.vacuous_levels()
        if bad:
            warnings.warn(f"{self}: level(s) {bad} have p*m >= 2^(n_j - n_(j-1)); every cell is empty",
                          VacuousLevelWarning, stacklevel=3)

    @classmethod
    def parse(cls, p: int, text: str) -> "PartitionSpec":
        """Parse the comma-separated "n:m" form, e.g. "3:2,6:2"."""
        try:
            levels = tuple(tuple(int(v) for v in tok.split(":")) for tok in text.split(",") if tok.strip())
        except ValueError as exc:
            raise ValueError(f"malformed partition spec {text!r}") from exc
        if any(len(lv) != 2 for lv in levels):
            raise ValueError(f"malformed partition spec {text!r}")
        return cls(p, levels)

    def __str__(self):
        return ",".join(f"{n}:{m}" for n, m in self.levels)

    @property
    def scale(self) -> int:
        return self.levels[-1][0]

    def __len__(self):
        return len(self.levels)

    def block_exponents(self) -> list[int]:
        """n_j - n_{j-1} for each level (n_0 = 0)."""
        prev, out = 0, []
        for n, _ in self.levels:
            out.append(n - prev)
            prev = n
        return out

    def vacuous_levels(self) -> list[int]:
        """1-based indices of levels whose bias conditions cannot be met."""
        return [j + 1 for j, ((_, m), d) in enumerate(zip(self.levels, self.block_exponents()))
                if self.p * m >= 1 << d]

    @property
    def vacuous(self) -> bool:
        return bool(self.vacuous_levels())

    def tail(self) -> "PartitionSpec":
        """Drop the first level and rebase the remaining scales at n_1."""
        if len(self.levels) < 2:
            raise ValueError("single-level spec has no tail")
        n1 = self.levels[0][0]
        return _quiet_spec(self.p, tuple((n - n1, m) for n, m in self.levels[1:]))

    def prefix(self, l: int) -> "PartitionSpec":
        return _quiet_spec(self.p, self.levels[:l])

    def with_margin(self, j: int, m: int) -> "PartitionSpec":
        """Replace the margin of level j (1-based)."""
        lv = list(self.levels)
        lv[j - 1] = (lv[j - 1][0], m)
        return _quiet_spec(self.p, tuple(lv))

    def reduced(self, shifts: Sequence[int], only: int | None = None) -> "PartitionSpec":
        """Margins m_j - k_j at every level, or only at level ``only``."""
        lv = []
        for j, ((n, m), k) in enumerate(zip(self.levels, shifts), start=1):
            lv.append((n, m - k if only is None or only == j else m))
        return _quiet_spec(self.p, tuple(lv))

    def extended(self, n: int, m: int) -> "PartitionSpec":
        return _quiet_spec(self.p, self.levels + ((n, m),))


def _quiet_spec(p, levels) -> PartitionSpec:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", VacuousLevelWarning)
        return PartitionSpec(p, levels)


def default_extension(spec: PartitionSpec) -> tuple[int, int]:
    """Smallest non-vacuous next level with margin 1."""
    d = 1
    while spec.p >= 1 << d:
        d += 1
    return spec.scale + d, 1


# -- the Bias predicate -------------------------------------------------------

def digit_label(block: GroupElement) -> int:
    """Inner classifier of a single-level partition: the value of a scale-0 block."""
    if block.scale != 0:
        raise ValueError("digit_label expects a scale-0 block")
    return int(block.digits[0])


def bias_contains(g: GroupElement, count_scale: int, classify_inner: Callable[[GroupElement], int],
                  S: Iterable[int], m: int) -> bool:
    """Membership of g in Bias_n(Y, (Y_0..Y_{p-1}, Z), S, m).

    ``classify_inner`` maps each restriction g|_tau (tau of length
    ``count_scale``) to the index of its cell, or Z.
    """
    p = g.p
    S = {int(s) % p for s in S}
    labels = [classify_inner(b) for b in blocks(g, count_scale)]
    if any(lb == Z for lb in labels):
        return False
    share = Fraction(1 << count_scale, p)
    counts = Counter(labels)
    for i in range(p):
        c = counts.get(i, 0)
        if i in S:
            if not c > share + m:
                return False
        elif not c < share - m:
            return False
    return True


def classify_by_definition(g: GroupElement, spec: PartitionSpec) -> int:
    """Reference classifier built directly from bias_contains (slow)."""
    h = at_scale(g, spec.scale)
    if h is None:
        raise ValueError(f"element is not constant on scale-{spec.scale} cylinders")
    n1, m1 = spec.levels[0]
    inner = digit_label if len(spec) == 1 else (lambda b, t=spec.tail(): classify_by_definition(b, t))
    fam = subset_classes(spec.p)
    hits = [x for x in range(spec.p) for S in fam.subsets(x) if bias_contains(h, n1, inner, S, m1)]
    if len(hits) > 1:
        raise AssertionError(f"element lies in several bias sets: {hits}")
    return hits[0] if hits else Z


# -- vectorized classification --------------------------------------------------

def _label_table(p: int) -> np.ndarray:
    return np.array(subset_classes(p).label_of_mask, dtype=np.int8)


def _bias_masks(inner: np.ndarray, p: int, m: int) -> np.ndarray:
    """Bitmask of the bias pattern S met by each row of block labels, or -1."""
    B = inner.shape[1]
    counts = np.stack([(inner == i).sum(axis=1) for i in range(p)], axis=1).astype(np.int64)
    above = p * counts > B + p * m
    below = p * counts < B - p * m
    valid = (above | below).all(axis=1) & ~(inner == Z).any(axis=1)
    masks = (above.astype(np.int64) << np.arange(p, dtype=np.int64)).sum(axis=1)
    return np.where(valid, masks, -1)


def bias_pattern_array(rows: np.ndarray, spec: PartitionSpec) -> np.ndarray:
    """Per row, the bitmask of the top-level pattern S with the row in Bias(S), or -1."""
    return _bias_masks(_inner_labels(rows, spec), spec.p, spec.levels[0][1])


def _inner_labels(rows: np.ndarray, spec: PartitionSpec) -> np.ndarray:
    rows = np.atleast_2d(rows)
    if rows.shape[1] != 1 << spec.scale:
        raise ValueError(f"rows have length {rows.shape[1]}, spec needs {1 << spec.scale}")
    B = 1 << spec.levels[0][0]
    if len(spec) == 1:
        return rows.astype(np.int8) if spec.p < 128 else rows
    sub = rows.reshape(rows.shape[0] * B, -1)
    return classify_array(sub, spec.tail()).reshape(rows.shape[0], B)


def classify_array(rows: np.ndarray, spec: PartitionSpec) -> np.ndarray:
    """Cell labels for each row of a digit array of scale ``spec.scale``."""
    rows = np.atleast_2d(rows)
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int8)
    masks = bias_pattern_array(rows, spec)
    table = np.append(_label_table(spec.p), np.int8(Z))   # index -1 -> Z
    return table[masks]


def classify(g: GroupElement, spec: PartitionSpec) -> int:
    if g.p != spec.p:
        raise ValueError(f"element over F_{g.p} classified against a spec over F_{spec.p}")
    h = at_scale(g, spec.scale)
    if h is None:
        raise ValueError(f"element of scale {g.scale} is not constant on scale-{spec.scale} cylinders")
    return int(classify_array(h.digits[None, :], spec)[0])


def shift_label(label, y: int, p: int):
    """Label of g + y*1 given the label of g (cells rotate, Z is fixed)."""
    label = np.asarray(label)
    return np.where(label == Z, Z, (label + y) % p)


# -- exact counting ---------------------------------------------------------------

def _count_window(B: int, p: int, m: int) -> tuple[int, int]:
    """(lo, hi): a count is 'above' iff c >= lo and 'below' iff c <= hi."""
    return (B + p * m) // p + 1, (B - p * m - 1) // p


@lru_cache(maxsize=None)
def profile_count(B: int, p: int, m: int, s: int) -> int:
    """Number of sequences in F_p^B whose value counts are above the band for
    s designated values and below it for the other p - s."""
    lo, hi = _count_window(B, p, m)
    ranges = [(lo, B)] * s + [(0, hi)] * (p - s)
    if any(a > b or b < 0 or a > B for a, b in ranges):
        return 0
    a, b = ranges[0]
    ways = [1 if a <= t <= b else 0 for t in range(B + 1)]
    for i, (a, b) in enumerate(ranges[1:], start=1):
        targets = [B] if i == p - 1 else range(B + 1)
        new = [0] * (B + 1)
        for t in targets:
            acc = 0
            for c in range(a, min(b, t) + 1):
                w = ways[t - c]
                if w:
                    acc += w * comb(t, c)
            new[t] = acc
        ways = new
    return ways[B]


def level_pattern_count(B: int, p: int, m: int) -> int:
    """Number of block-label sequences of length B (no Z) landing in one fixed cell."""
    return sum(mult * profile_count(B, p, m, s) for s, mult in subset_classes(p).size_profile().items())


def _estimated_digits(spec: PartitionSpec) -> float:
    return (1 << spec.scale) * math.log10(spec.p)


def cell_size(spec: PartitionSpec, max_digits: int | None = DEFAULT_MAX_DIGITS) -> int:
    """|P_x| inside G_p^(n_l); independent of x."""
    if max_digits is not None and _estimated_digits(spec) > max_digits:
        raise BudgetExceeded(f"exact count for {spec} needs ~{_estimated_digits(spec):.0f} digits; "
                             "use cell_density for the log-space value")
    w = 1
    for (n, m), d in reversed(list(zip(spec.levels, spec.block_exponents()))):
        B = 1 << d
        w = w ** B * level_pattern_count(B, spec.p, m)
    return w


def count_cell(spec: PartitionSpec, label: int, max_digits: int | None = DEFAULT_MAX_DIGITS) -> int:
    """Exact cardinality of the cell ``label`` (x or Z) in G_p^(n_l)."""
    w = cell_size(spec, max_digits)
    if label == Z:
        return spec.p ** (1 << spec.scale) - spec.p * w
    if not 0 <= label < spec.p:
        raise ValueError(f"label {label} out of range")
    return w


@dataclass(frozen=True)
class CellDensity:
    """|P_x| / |G_p^(n_l)|, exactly when affordable and otherwise as a natural log."""

    spec: str
    exact: Fraction | None
    log_value: float
    log_error: float

    @property
    def value(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return math.exp(self.log_value)


def cell_density(spec: PartitionSpec, max_digits: int | None = DEFAULT_MAX_DIGITS) -> CellDensity:
    if max_digits is None or _estimated_digits(spec) <= max_digits:
        frac = Fraction(cell_size(spec, None), spec.p ** (1 << spec.scale))
        log_v = -math.inf if frac == 0 else math.log(frac.numerator) - math.log(frac.denominator)
        return CellDensity(str(spec), frac, log_v, 0.0)
    eps = 2.0 ** -52
    log_f, err = -math.log(spec.p), eps
    for (n, m), d in reversed(list(zip(spec.levels, spec.block_exponents()))):
        B = 1 << d
        patterns = level_pattern_count(B, spec.p, m)
        if patterns == 0:
            return CellDensity(str(spec), Fraction(0), -math.inf, 0.0)
        log_f = B * log_f + math.log(patterns)
        err = B * err + 4 * eps * (abs(log_f) + 1)
    return CellDensity(str(spec), None, log_f, err)


def z_bound(p: int, n: int, m: int) -> int:
    """p(2m+1)(p-1)^(2^n - floor(2^n/p - m)) * M_{n,m}, an upper bound for |Z^(n,m)|.

    M_{n,m} is the largest binomial C(2^n, t) with 2^n/p - m <= t <= 2^n/p + m.
    """
    B = 1 << n
    t_lo = max(0, -((p * m - B) // p))       # ceil(B/p - m)
    t_hi = min(B, (B + p * m) // p)          # floor(B/p + m)
    M = max((comb(B, t) for t in range(t_lo, t_hi + 1)), default=0)
    floor_low = (B - p * m) // p
    return p * (2 * m + 1) * (p - 1) ** (B - floor_low) * M


def concatenation_bound(spec: PartitionSpec, max_digits: int | None = DEFAULT_MAX_DIGITS) -> int:
    """|P_x^{n_{l-1}}| * min_g |G^(n_l)[g, m_l]|, a lower bound for |P_x^{n_l}| (l >= 2)."""
    if len(spec) < 2:
        raise ValueError("the concatenation bound needs at least two levels")
    prev = spec.prefix(len(spec) - 1)
    n_last, m_last = spec.levels[-1]
    base = _quiet_spec(spec.p, ((n_last - prev.scale, m_last),))
    return cell_size(prev, max_digits) * cell_size(base, max_digits) ** (1 << prev.scale)


# -- sampling ------------------------------------------------------------------------

def _randbelow(rng: np.random.Generator, n: int) -> int:
    if n <= 0:
        raise ValueError("empty range")
    if n < 1 << 62:
        return int(rng.integers(0, n))
    k = n.bit_length()
    words = (k + 31) // 32
    while True:
        r = 0
        for w in rng.integers(0, 1 << 32, size=words, dtype=np.uint64):
            r = (r << 32) | int(w)
        r >>= words * 32 - k
        if r < n:
            return r


def _compositions(B: int, p: int, allowed: Callable[[int], bool]):
    """Compositions of B into p parts, each part passing ``allowed``."""
    def rec(i, left):
        if i == p - 1:
            if allowed(left):
                yield (left,)
            return
        for c in range(left + 1):
            if allowed(c):
                for rest in rec(i + 1, left - c):
                    yield (c,) + rest
    yield from rec(0, B)


class BaseCellTable:
    """Value-count profiles of the single-level cells P_x^{(d, m)}, B = 2^d digits,
    weighted by multinomial coefficients, for exact uniform sampling."""

    def __init__(self, p: int, d: int, m: int, budget: int | None = DEFAULT_PROFILE_BUDGET):
        self.p, self.B, self.m = p, 1 << d, m
        lo, hi = _count_window(self.B, p, m)
        labels = subset_classes(p).label_of_mask
        profiles: list[list[tuple[int, ...]]] = [[] for _ in range(p)]
        weights: list[list[int]] = [[] for _ in range(p)]
        seen = 0
        for c in _compositions(self.B, p, lambda c: c >= lo or c <= hi):
            seen += 1
            if budget is not None and seen > budget:
                raise BudgetExceeded(f"more than {budget} count profiles for base cell d={d}, m={m}")
            x = labels[mask_of(i for i in range(p) if c[i] >= lo)]
            if x == Z:
                continue
            w = math.factorial(self.B)
            for ci in c:
                w //= math.factorial(ci)
            profiles[x].append(c)
            weights[x].append(w)
        if not profiles[0]:
            raise ValueError(f"base cell (d={d}, m={m}) over F_{p} is empty (vacuous level)")
        self.profiles = [np.array(pr, dtype=np.int64) for pr in profiles]
        self.cumulative = [list(_accumulate(w)) for w in weights]
        self.total = self.cumulative[0][-1]

    def _indices(self, x: int, count: int, rng: np.random.Generator) -> np.ndarray:
        cum = self.cumulative[x]
        if self.total < 1 << 62:
            r = rng.integers(0, self.total, size=count)
            return np.searchsorted(np.array(cum, dtype=np.int64), r, side="right")
        return np.array([bisect.bisect_right(cum, _randbelow(rng, self.total)) for _ in range(count)],
                        dtype=np.int64)

    def draw(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One uniform member of P_{xs[i]} per entry, as rows of B digits."""
        xs = np.asarray(xs).reshape(-1)
        counts = np.empty((xs.size, self.p), dtype=np.int64)
        for x in range(self.p):
            sel = np.flatnonzero(xs == x)
            if sel.size:
                counts[sel] = self.profiles[x][self._indices(x, sel.size, rng)]
        edges = np.cumsum(counts, axis=1)[:, :-1]
        pos = np.arange(self.B)
        rows = (pos[None, :, None] >= edges[:, None, :]).sum(axis=2)
        return rng.permuted(rows, axis=1).astype(digit_dtype(self.p))


def _accumulate(ws):
    total = 0
    for w in ws:
        total += w
        yield total


@lru_cache(maxsize=64)
def base_cell_table(p: int, d: int, m: int) -> BaseCellTable:
    return BaseCellTable(p, d, m)


def sample_cell(spec: PartitionSpec, x: int, rng: np.random.Generator, size: int | None = None):
    """Uniform samples from the concatenation subset of P_x.

    Level 1 is sampled exactly from P_x^{(n_1, m_1)}; each further level fills
    every block h|_tau, tau in Omega_{n_{j-1}}, with a uniform member of the base
    cell P_{g(tau)}^{(n_j - n_{j-1}, m_j)}. Returns a GroupElement when
    ``size`` is None, otherwise an array of ``size`` digit rows.
    """
    if spec.vacuous:
        raise ValueError(f"spec {spec} has vacuous level(s) {spec.vacuous_levels()}; cells are empty")
    count = 1 if size is None else size
    p = spec.p
    exps = spec.block_exponents()
    rows = base_cell_table(p, exps[0], spec.levels[0][1]).draw(np.full(count, x % p), rng)
    for (n, m), d in zip(spec.levels[1:], exps[1:]):
        blocks_ = base_cell_table(p, d, m).draw(rows.reshape(-1), rng)
        rows = blocks_.reshape(count, -1)
    if size is None:
        return GroupElement(p, spec.scale, rows[0])
    return rows
