"""Arithmetic on the finite truncations G_p^(n) of the group of F_p-valued
functions on binary strings.

An element of scale ``n`` is a vector of ``2**n`` digits in F_p. Digit ``t``
is the value on the cylinder of the length-``n`` prefix whose binary
expansion is ``t`` (first bit most significant), so restricting to a prefix
is a contiguous slice and concatenating blocks is a block write.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_BUDGET = 1 << 20


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its budget.

    Callers should fall back to a sampled mode.
    """


@lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise ValueError(f"modulus must be prime, got {p!r}")
    return int(p)


def digit_dtype(p: int):
    return np.int16 if p < 128 else np.int64


class GroupElement:
    """Immutable element of G_p^(n).

    Equality is scale-independent: an element equals its embedding into any
    finer scale.
    """

    __slots__ = ("p", "scale", "digits", "_key")

    def __init__(self, p: int, scale: int, digits: Sequence[int] | np.ndarray):
        p = check_prime(p)
        if scale < 0:
            raise ValueError("scale must be non-negative")
        arr = np.array(digits, dtype=np.int64).reshape(-1)
        if arr.size != 1 << scale:
            raise ValueError(f"expected {1 << scale} digits at scale {scale}, got {arr.size}")
        arr = np.mod(arr, p).astype(digit_dtype(p))
        arr.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "scale", int(scale))
        object.__setattr__(self, "digits", arr)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("GroupElement is immutable")

    @property
    def size(self) -> int:
        return 1 << self.scale

    def minimal(self) -> "GroupElement":
        """The same element at the smallest scale on which it is defined."""
        d = self.digits
        s = self.scale
        while s > 0:
            pairs = d.reshape(-1, 2)
            if not np.array_equal(pairs[:, 0], pairs[:, 1]):
                break
            d = pairs[:, 0]
            s -= 1
        if s == self.scale:
            return self
        return GroupElement(self.p, s, d)

    def _canonical(self):
        if self._key is None:
            m = self.minimal()
            object.__setattr__(self, "_key", (m.p, m.scale, m.digits.tobytes()))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self._canonical() == other._canonical()

    def __hash__(self):
        return hash(self._canonical())

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, neg(other))

    def __neg__(self):
        return neg(self)

    def __rmul__(self, c):
        return scalar_mul(c, self)

    def __repr__(self):
        return f"GroupElement({format_element(self)!r})"

    def tolist(self) -> list[int]:
        return [int(v) for v in self.digits]


def constant(p: int, n: int, x: int) -> GroupElement:
    """The constant element x*1 at scale n."""
    p = check_prime(p)
    if not 0 <= x < p:
        raise ValueError(f"constant value {x} not in [0, {p})")
    return GroupElement(p, n, np.full(1 << n, x))


def identity(p: int, n: int = 0) -> GroupElement:
    return constant(p, n, 0)


def embed(g: GroupElement, N: int) -> GroupElement:
    """View g as an element of G_p^(N), N >= g.scale."""
    if N < g.scale:
        raise ValueError(f"cannot embed scale {g.scale} element into scale {N}")
    if N == g.scale:
        return g
    return GroupElement(g.p, N, np.repeat(g.digits, 1 << (N - g.scale)))


def _common(a: GroupElement, b: GroupElement) -> tuple[GroupElement, GroupElement]:
    if a.p != b.p:
        raise ValueError(f"mismatched primes {a.p} and {b.p}")
    N = max(a.scale, b.scale)
    return embed(a, N), embed(b, N)


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    a, b = _common(a, b)
    return GroupElement(a.p, a.scale, a.digits.astype(np.int64) + b.digits)


def neg(a: GroupElement) -> GroupElement:
    return GroupElement(a.p, a.scale, -a.digits.astype(np.int64))


def sub(a: GroupElement, b: GroupElement) -> GroupElement:
    return add(a, neg(b))


def scalar_mul(c: int, a: GroupElement) -> GroupElement:
    return GroupElement(a.p, a.scale, (int(c) % a.p) * a.digits.astype(np.int64))


def tau_index(tau: str | Sequence[int]) -> tuple[int, int]:
    """Return (index, length) of a binary prefix given as "0110" or a bit tuple."""
    bits = [int(b) for b in tau]
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"not a binary string: {tau!r}")
    idx = 0
    for b in bits:
        idx = 2 * idx + b
    return idx, len(bits)


def restrict(g: GroupElement, tau: str | Sequence[int]) -> GroupElement:
    """g|_tau: the element w -> g(tau w), of scale g.scale - len(tau)."""
    idx, m = tau_index(tau)
    if m > g.scale:
        raise ValueError(f"prefix of length {m} longer than scale {g.scale}")
    width = 1 << (g.scale - m)
    return GroupElement(g.p, g.scale - m, g.digits[idx * width:(idx + 1) * width])


def blocks(g: GroupElement, m: int) -> list[GroupElement]:
    """All restrictions g|_tau for tau in Omega_m, in index order."""
    if m > g.scale:
        raise ValueError(f"prefix length {m} exceeds scale {g.scale}")
    rows = g.digits.reshape(1 << m, -1)
    return [GroupElement(g.p, g.scale - m, r) for r in rows]


def content_count(g: GroupElement, A: Iterable[int]) -> int:
    """Number of scale-n cylinders on which g takes a value in A."""
    vals = sorted({int(a) for a in A})
    if not vals:
        return 0
    return int(np.isin(g.digits, vals).sum())


def is_constant_on(g: GroupElement, n: int) -> bool:
    """True if g is constant on every cylinder of length n (i.e. g lies in G_p^(n))."""
    if n >= g.scale:
        return True
    rows = g.digits.reshape(1 << n, -1)
    return bool((rows == rows[:, :1]).all())


def at_scale(g: GroupElement, n: int) -> GroupElement | None:
    """g represented at scale n, or None if g does not lie in G_p^(n)."""
    if n >= g.scale:
        return embed(g, n)
    if not is_constant_on(g, n):
        return None
    return GroupElement(g.p, n, g.digits.reshape(1 << n, -1)[:, 0])


# -- enumeration ------------------------------------------------------------

def group_order(p: int, n: int) -> int:
    return p ** (1 << n)


def _check_budget(count: int, budget: int | None, what: str = "elements"):
    if budget is not None and count > budget:
        raise BudgetExceeded(f"{count} {what} exceeds budget {budget}; use sampling instead")


def index_to_digits(p: int, n: int, idx) -> np.ndarray:
    """Digit rows (lexicographic order, digit 0 most significant) for indices."""
    L = 1 << n
    idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
    out = np.empty((idx.size, L), dtype=digit_dtype(p))
    rest = idx.copy()
    for t in range(L - 1, -1, -1):
        out[:, t] = rest % p
        rest //= p
    return out


def digits_to_index(p: int, digits: np.ndarray) -> np.ndarray:
    """Inverse of index_to_digits; rows of ``digits`` are elements."""
    d = np.atleast_2d(np.asarray(digits, dtype=np.int64))
    L = d.shape[1]
    if p ** L > np.iinfo(np.int64).max:
        raise BudgetExceeded(f"group of order {p}^{L} is too large to index")
    powers = p ** np.arange(L - 1, -1, -1, dtype=np.int64)
    return d @ powers


def group_array(p: int, n: int, start: int = 0, stop: int | None = None,
                budget: int | None = DEFAULT_BUDGET) -> np.ndarray:
    """All elements of G_p^(n) with index in [start, stop) as a 2-D digit array."""
    p = check_prime(p)
    order = group_order(p, n)
    stop = order if stop is None else min(stop, order)
    _check_budget(stop - start, budget)
    return index_to_digits(p, n, np.arange(start, stop, dtype=np.int64))


def enumerate_group(p: int, n: int, start: int = 0, stop: int | None = None,
                    budget: int | None = DEFAULT_BUDGET,
                    chunk: int = 4096) -> Iterator[GroupElement]:
    """Stream G_p^(n) in lexicographic order; [start, stop) selects a sub-range."""
    p = check_prime(p)
    order = group_order(p, n)
    stop = order if stop is None else min(stop, order)
    _check_budget(stop - start, budget)
    for lo in range(start, stop, chunk):
        for row in group_array(p, n, lo, min(lo + chunk, stop), budget=None):
            yield GroupElement(p, n, row)


def split_range(total: int, parts: int) -> list[tuple[int, int]]:
    """Split [0, total) into ``parts`` contiguous sub-ranges."""
    parts = max(1, parts)
    step, extra = divmod(total, parts)
    out, lo = [], 0
    for i in range(parts):
        hi = lo + step + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


# -- serialization ------------------------------------------------------------

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def format_element(g: GroupElement) -> str:
    """Serialize as "p,scale:digits", e.g. "2,2:0110"."""
    if g.p <= len(_DIGITS):
        body = "".join(_DIGITS[int(v)] for v in g.digits)
    else:
        body = ".".join(str(int(v)) for v in g.digits)
    return f"{g.p},{g.scale}:{body}"


def parse_element(text: str) -> GroupElement:
    try:
        head, body = text.strip().split(":", 1)
        p_s, n_s = head.split(",")
        p, n = int(p_s), int(n_s)
    except ValueError as exc:
        raise ValueError(f"malformed element {text!r}; expected 'p,scale:digits'") from exc
    if p <= len(_DIGITS):
        digits = [_DIGITS.index(ch) for ch in body.lower()]
    else:
        digits = [int(tok) for tok in body.split(".")]
    if any(d >= p for d in digits):
        raise ValueError(f"digit out of range for p={p} in {text!r}")
    return GroupElement(p, n, digits)


def as_rows(elements: Iterable[GroupElement] | np.ndarray, p: int, n: int) -> np.ndarray:
    """Stack elements (embedded to scale n) into a digit array."""
    if isinstance(elements, np.ndarray):
        arr = np.atleast_2d(elements)
        if arr.shape[1] != 1 << n:
            raise ValueError(f"rows have length {arr.shape[1]}, expected {1 << n}")
        return arr
    rows = []
    for g in elements:
        if g.p != p:
            raise ValueError(f"mismatched primes {g.p} and {p}")
        h = at_scale(g, n)
        if h is None:
            raise ValueError(f"element {format_element(g)} does not lie in scale {n}")
        rows.append(h.digits)
    if not rows:
        return np.zeros((0, 1 << n), dtype=digit_dtype(p))
    return np.stack(rows).astype(digit_dtype(p))
