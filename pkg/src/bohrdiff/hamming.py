"""Hamming balls U(n, k) around 0 and their translates V(n, k) = U(n, k) + 1."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .field import (
    DEFAULT_BUDGET,
    GroupElement,
    _check_budget,
    at_scale,
    check_prime,
    digit_dtype,
)


@dataclass(frozen=True)
class BallSpec:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 0 or self.k < 0:
            raise ValueError(f"ball scale and radius must be non-negative, got {self}")
        # U(n, 2^n) is already the whole group
        if self.k > 1 << self.n:
            object.__setattr__(self, "k", 1 << self.n)

    @classmethod
    def parse(cls, text: str) -> "BallSpec":
        n, k = text.split(":")
        return cls(int(n), int(k))

    def __str__(self):
        return f"{self.n}:{self.k}"


def parse_balls(text: str) -> list[BallSpec]:
    return [BallSpec.parse(tok) for tok in text.split(",") if tok.strip()]


def _weight_from(g: GroupElement, ball: BallSpec, centre: int) -> int | None:
    h = at_scale(g, ball.n)
    if h is None:
        return None
    return int((h.digits != centre).sum())


def in_U(g: GroupElement, ball: BallSpec) -> bool:
    w = _weight_from(g, ball, 0)
    return w is not None and w <= ball.k


def in_V(g: GroupElement, ball: BallSpec) -> bool:
    w = _weight_from(g, ball, 1 % g.p)
    return w is not None and w <= ball.k


def in_S_union(g: GroupElement, balls: Sequence[BallSpec], shift: int = 1) -> bool:
    """Membership in the union of the translates U(n_i, k_i) + shift*1."""
    c = shift % g.p
    for ball in balls:
        w = _weight_from(g, ball, c)
        if w is not None and w <= ball.k:
            return True
    return False


def ball_size(p: int, ball: BallSpec) -> int:
    L = 1 << ball.n
    return sum(comb(L, j) * (p - 1) ** j for j in range(min(ball.k, L) + 1))


def ball_array(p: int, ball: BallSpec, centre: int = 0,
               budget: int | None = DEFAULT_BUDGET) -> np.ndarray:
    """All members of U(n, k) + centre*1 as rows of a digit array, in weight order."""
    p = check_prime(p)
    _check_budget(ball_size(p, ball), budget)
    L = 1 << ball.n
    rows = []
    for w in range(ball.k + 1):
        for pos in itertools.combinations(range(L), w):
            for vals in itertools.product(range(1, p), repeat=w):
                row = np.zeros(L, dtype=np.int64)
                row[list(pos)] = vals
                rows.append(row)
    out = np.array(rows, dtype=np.int64).reshape(-1, L)
    return ((out + centre) % p).astype(digit_dtype(p))


def enumerate_ball(p: int, ball: BallSpec, centre: int = 0,
                   budget: int | None = DEFAULT_BUDGET) -> Iterator[GroupElement]:
    for row in ball_array(p, ball, centre, budget):
        yield GroupElement(p, ball.n, row)


def sample_ball(p: int, ball: BallSpec, rng: np.random.Generator, size: int,
                centre: int = 0) -> np.ndarray:
    """Uniform samples from U(n, k) + centre*1, shape (size, 2**n)."""
    L = 1 << ball.n
    weights = np.array([comb(L, j) * (p - 1) ** j for j in range(ball.k + 1)], dtype=float)
    w = rng.choice(ball.k + 1, size=size, p=weights / weights.sum())
    keys = rng.random((size, L))
    ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
    support = ranks < w[:, None]
    vals = rng.integers(1, p, size=(size, L)) if p > 2 else np.ones((size, L), dtype=np.int64)
    return ((vals * support + centre) % p).astype(digit_dtype(p))


def weight_array(rows: np.ndarray, centre: int = 0) -> np.ndarray:
    return (np.asarray(rows) != centre).sum(axis=1)
