import numpy as np
from hypothesis import given
from hypothesis import strategies as st

import oracles
from bohrdiff.field import GroupElement, constant, embed, enumerate_group, identity, scalar_mul
from bohrdiff.hamming import (
    BallSpec,
    ball_array,
    ball_size,
    enumerate_ball,
    in_S_union,
    in_U,
    in_V,
    parse_balls,
    sample_ball,
)


def test_membership_examples():
    for n in range(4):
        assert in_U(identity(2, n), BallSpec(n, 0))
        assert not in_U(constant(2, n, 1), BallSpec(n, (1 << n) - 1))
        assert in_U(constant(2, n, 1), BallSpec(n, 1 << n))
        assert in_V(constant(3, n, 1), BallSpec(n, 0))
        assert not in_V(identity(3, n), BallSpec(n, (1 << n) - 1))
    assert sum(in_U(g, BallSpec(2, 1)) for g in enumerate_group(2, 2)) == 5
    assert sum(in_V(g, BallSpec(2, 1)) for g in enumerate_group(2, 2)) == 5
    assert in_S_union(constant(5, 2, 1), [BallSpec(2, 0)], shift=1)
    assert not in_S_union(identity(2, 6), [BallSpec(3, 1), BallSpec(6, 1)], shift=1)


def test_ball_size_examples():
    assert ball_size(2, BallSpec(2, 1)) == 5
    assert ball_size(3, BallSpec(1, 1)) == 5
    for p, n in [(2, 3), (3, 2), (5, 1)]:
        assert ball_size(p, BallSpec(n, 1 << n)) == p ** (1 << n)


def test_radius_clamp_and_parse():
    assert BallSpec(2, 99).k == 4
    assert parse_balls("3:1,4:2") == [BallSpec(3, 1), BallSpec(4, 2)]
    assert str(BallSpec(3, 1)) == "3:1"


def test_ball_enumeration_matches_filter():
    for p, n, k in [(2, 2, 1), (2, 3, 2), (3, 2, 1), (3, 1, 2), (5, 1, 1)]:
        for centre in (0, 1):
            got = {tuple(r) for r in ball_array(p, BallSpec(n, k), centre)}
            want = set(oracles.ball(p, n, k, centre))
            assert got == want
            assert ball_size(p, BallSpec(n, k)) == len(want)


def test_finer_scale_elements_are_tested_by_constancy():
    g = embed(GroupElement(2, 2, [1, 0, 1, 1]), 4)
    assert in_V(g, BallSpec(2, 1))
    assert not in_V(g, BallSpec(2, 0))
    h = GroupElement(2, 3, [1, 1, 0, 1, 1, 1, 1, 1])  # not constant on scale-2 cylinders
    assert not in_V(h, BallSpec(2, 2))
    assert in_V(h, BallSpec(3, 1))


def test_nesting_across_radius_and_scale():
    for n, k in [(1, 1), (2, 1), (2, 2)]:
        for u in enumerate_ball(3, BallSpec(n, k)):
            assert in_U(u, BallSpec(n, k + 1))
            for N in (n + 1, n + 2):
                assert in_U(embed(u, N), BallSpec(N, k << (N - n)))


def test_scalar_invariance_and_sum_closure():
    p, n = 3, 2
    U1 = list(enumerate_ball(p, BallSpec(n, 1)))
    for u in U1:
        for c in range(p):
            assert in_U(scalar_mul(c, u), BallSpec(n, 1))
    for a in U1:
        for b in U1:
            assert in_U(a + b, BallSpec(n, 2))


@given(st.sampled_from([2, 3]), st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=3),
       st.integers(0, 2 ** 32 - 1))
def test_union_is_disjunction(p, raw, seed):
    balls = [BallSpec(n, k) for n, k in raw]
    N = max(b.n for b in balls)
    rng = np.random.default_rng(seed)
    # bias towards ones so that members actually occur
    digits = np.where(rng.random(1 << N) < 0.8, 1, rng.integers(0, p, 1 << N))
    g = GroupElement(p, N, digits)
    assert in_S_union(g, balls, shift=1) == any(in_V(g, b) for b in balls)


def test_sampled_ball_members_and_spread():
    rng = np.random.default_rng(3)
    rows = sample_ball(3, BallSpec(3, 2), rng, 4000, centre=1)
    assert ((rows != 1).sum(axis=1) <= 2).all()
    # every weight class appears, roughly in proportion to its size (1, 16, 112 of 129)
    w = (rows != 1).sum(axis=1)
    frac = np.bincount(w, minlength=3) / len(w)
    assert abs(frac[2] - 112 / 129) < 0.03
