"""Exhaustive and sampled verification of the shift properties of the partitions.

For a spec (n_1, m_1), ..., (n_l, m_l) and shift radii k_j < m_j the seven
checked properties are, for all x, y in F_p and every level j:

  (i)    P_x + y1 = P_{x+y}
  (ii)   P_x + U(n_j, k_j) lands in P_x of the partition with m_j replaced by m_j - k_j
  (iii)  P_x + U(n_j, k_j) + y1 lands in P_{x+y} of that reduced spec
  (iv)   every element meets at most one bias set, so cells are disjoint
  (v)    P_x is contained in P_x of the reduced spec
  (vi)   P_x misses P_y of the reduced spec when x != y
  (vii)  P_x of every prefix is contained in P_x of the next longer prefix,
         including one extra level past the end, and x1 lies in P_x
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .field import DEFAULT_BUDGET, GroupElement, format_element, group_array
from .hamming import BallSpec, ball_array, sample_ball
from .partition import (
    Z,
    PartitionSpec,
    _inner_labels,
    classify_array,
    default_extension,
    sample_cell,
    shift_label,
    subset_classes,
)
from .report import CheckRecord, Tally

PART_NAMES = {
    "i": "constant_relabel",
    "ii": "hamming_shift",
    "iii": "hamming_and_constant_shift",
    "iv": "cell_disjointness",
    "v": "margin_monotonicity",
    "vi": "cross_cell_disjointness",
    "vii": "level_extension",
}

PAIR_CHUNK = 1 << 22


def _fmt(p: int, n: int, row) -> str:
    return format_element(GroupElement(p, n, row))


def embed_rows(rows: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    return np.repeat(rows, 1 << (n_to - n_from), axis=1)


def bias_membership_array(rows: np.ndarray, spec: PartitionSpec, S: int) -> np.ndarray:
    """Membership of each row in the top-level Bias set for the pattern mask S,
    evaluated condition by condition."""
    inner = _inner_labels(rows, spec)
    p, (_, m) = spec.p, spec.levels[0]
    B = inner.shape[1]
    ok = ~(inner == Z).any(axis=1)
    for i in range(p):
        c = (inner == i).sum(axis=1).astype(np.int64)
        ok &= (p * c > B + p * m) if S >> i & 1 else (p * c < B - p * m)
    return ok


def _check_shifts(spec: PartitionSpec, shifts: Sequence[int]) -> tuple[int, ...]:
    shifts = tuple(int(k) for k in shifts)
    if len(shifts) != len(spec):
        raise ValueError(f"need one shift radius per level, got {shifts} for {spec}")
    for (n, m), k in zip(spec.levels, shifts):
        if not 0 <= k < m:
            raise ValueError(f"shift radius k={k} must satisfy 0 <= k < m={m}")
    return shifts


def _tag(spec: PartitionSpec, part: str) -> str:
    kind = "base-partition-shift" if len(spec) == 1 else "iterated-partition-shift"
    return f"{kind}/({part})"


def _pairwise(p, A, labels, U, chunk=PAIR_CHUNK):
    """Yield (sums, labels_of_A, index_into_A, index_into_U) over all pairs in chunks."""
    if len(A) == 0 or len(U) == 0:
        return
    L = A.shape[1]
    per = max(1, chunk // max(1, len(U) * L))
    for lo in range(0, len(A), per):
        a = A[lo:lo + per].astype(np.int64)
        sums = (a[:, None, :] + U[None, :, :]) % p
        ia, iu = np.meshgrid(np.arange(lo, lo + len(a)), np.arange(len(U)), indexing="ij")
        yield sums.reshape(-1, L), labels[ia.reshape(-1)], ia.reshape(-1), iu.reshape(-1)


def verify_shift_lemma(spec: PartitionSpec, shifts: Sequence[int], mode: str = "exhaustive",
                       samples: int = 10_000, seed: int = 0, budget: int | None = DEFAULT_BUDGET,
                       extension: tuple[int, int] | None = None,
                       parts: Sequence[str] | None = None) -> list[CheckRecord]:
    """Check properties (i)-(vii) and return one record per property."""
    shifts = _check_shifts(spec, shifts)
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    parts = list(parts or PART_NAMES)
    p, L = spec.p, 1 << spec.scale
    ext = extension or default_extension(spec)
    params = {"p": p, "spec": str(spec), "shifts": ",".join(map(str, shifts)),
              "extension": f"{ext[0]}:{ext[1]}"}
    if mode == "sampled":
        params.update(samples=samples, seed=seed)
    streams = np.random.SeedSequence(seed).spawn(len(PART_NAMES) + 1)
    rngs = {name: np.random.default_rng(s) for name, s in zip(list(PART_NAMES) + ["members"], streams)}

    # members of the cells, plus a pool of arbitrary elements
    if mode == "exhaustive":
        pool = group_array(p, spec.scale, budget=budget)
        pool_labels = classify_array(pool, spec)
        sel = pool_labels != Z
        members, member_labels = pool[sel], pool_labels[sel]
    else:
        rng = rngs["members"]
        member_labels = rng.integers(0, p, size=samples).astype(np.int8)
        members = np.empty((samples, L), dtype=np.int64)
        if not spec.vacuous:
            for x in range(p):
                idx = np.flatnonzero(member_labels == x)
                if idx.size:
                    members[idx] = sample_cell(spec, x, rng, size=idx.size)
        else:
            members, member_labels = members[:0], member_labels[:0]
        pool = rng.integers(0, p, size=(samples, L))
        pool = np.concatenate([pool, members])
        pool_labels = classify_array(pool, spec)
        bad = np.flatnonzero(classify_array(members, spec) != member_labels) if len(members) else []
        if len(bad):
            raise AssertionError(f"concatenation sample {_fmt(p, spec.scale, members[bad[0]])} "
                                 "is not in its cell")

    notes = []
    if spec.vacuous:
        notes.append(f"vacuous level(s) {spec.vacuous_levels()}: p*m >= 2^(n_j - n_(j-1)), all cells empty")

    def balls(j):
        n_j, k_j = spec.levels[j - 1][0], shifts[j - 1]
        ball = BallSpec(n_j, k_j)
        return ball, n_j

    records: list[CheckRecord] = []

    if "i" in parts:
        t = Tally()
        for y in range(p):
            moved = classify_array((pool.astype(np.int64) + y) % p, spec)
            bad = np.flatnonzero(moved != shift_label(pool_labels, y, p))
            t.add(len(pool), [f"{_fmt(p, spec.scale, pool[b])} y={y}" for b in bad[:3]], len(bad))
        records.append(t.record(f"shift.i.{PART_NAMES['i']}", _tag(spec, "i"), params, mode, notes=list(notes)))

    def hamming_part(part: str, with_constant: bool) -> CheckRecord:
        t = Tally()
        rng = rngs[part]
        for j in range(1, len(spec) + 1):
            ball, n_j = balls(j)
            red = spec.reduced(shifts, only=j)
            ys = range(p) if with_constant else [0]
            if mode == "exhaustive":
                U = embed_rows(ball_array(p, ball, budget=budget).astype(np.int64), n_j, spec.scale)
                for y in ys:
                    for sums, lab, ia, iu in _pairwise(p, members, member_labels, U):
                        got = classify_array((sums + y) % p, red)
                        bad = np.flatnonzero(got != (lab.astype(np.int64) + y) % p)
                        t.add(len(sums), [f"g={_fmt(p, spec.scale, members[ia[b]])} "
                                          f"u={_fmt(p, spec.scale, U[iu[b]])} y={y} level={j}"
                                          for b in bad[:3]], len(bad))
            else:
                count = len(members) // len(spec) + (1 if j <= len(members) % len(spec) else 0)
                if count == 0:
                    continue
                idx = rng.choice(len(members), size=count, replace=len(members) < count)
                U = embed_rows(sample_ball(p, ball, rng, count).astype(np.int64), n_j, spec.scale)
                y = rng.integers(0, p, size=count) if with_constant else np.zeros(count, dtype=np.int64)
                sums = (members[idx].astype(np.int64) + U + y[:, None]) % p
                got = classify_array(sums, red)
                bad = np.flatnonzero(got != (member_labels[idx].astype(np.int64) + y) % p)
                t.add(count, [f"g={_fmt(p, spec.scale, members[idx[b]])} u={_fmt(p, spec.scale, U[b])} "
                              f"y={int(y[b])} level={j}" for b in bad[:3]], len(bad))
        return t.record(f"shift.{part}.{PART_NAMES[part]}", _tag(spec, part), params, mode, notes=list(notes))

    if "ii" in parts:
        records.append(hamming_part("ii", with_constant=False))
    if "iii" in parts:
        records.append(hamming_part("iii", with_constant=True))

    if "iv" in parts:
        t = Tally()
        fam = subset_classes(p)
        hits = np.zeros(len(pool), dtype=np.int64)
        cells_hit = np.zeros((len(pool), p), dtype=bool)
        for S in range(1 << p):
            inside = bias_membership_array(pool, spec, S)
            if S in (0, (1 << p) - 1):
                # patterns S = {} and S = F_p are always empty
                bad = np.flatnonzero(inside)
                t.add(0, [f"{_fmt(p, spec.scale, pool[b])} in Bias(S={S:b})" for b in bad[:3]], len(bad))
                continue
            hits += inside
            cells_hit[:, fam.label_of_mask[S]] |= inside
        bad = np.flatnonzero((hits > 1) | (cells_hit.sum(axis=1) > 1))
        t.add(len(pool), [_fmt(p, spec.scale, pool[b]) for b in bad[:3]], len(bad))
        # the classifier must agree with the bias-set memberships
        expect = np.where(cells_hit.any(axis=1), cells_hit.argmax(axis=1), Z)
        bad = np.flatnonzero(expect != pool_labels)
        t.add(0, [f"classifier disagrees on {_fmt(p, spec.scale, pool[b])}" for b in bad[:3]], len(bad))
        records.append(t.record(f"shift.iv.{PART_NAMES['iv']}", _tag(spec, "iv"), params, mode,
                                notes=list(notes)))

    for part in ("v", "vi"):
        if part not in parts:
            continue
        t = Tally()
        for j in range(1, len(spec) + 1):
            got = classify_array(members, spec.reduced(shifts, only=j))
            lab = member_labels.astype(np.int64)
            if part == "v":
                bad = np.flatnonzero(got != lab)
            else:
                bad = np.flatnonzero((got != lab) & (got != Z))
            t.add(len(members), [f"{_fmt(p, spec.scale, members[b])} level={j}" for b in bad[:3]], len(bad))
        records.append(t.record(f"shift.{part}.{PART_NAMES[part]}", _tag(spec, part), params, mode,
                                notes=list(notes)))

    if "vii" in parts:
        records.append(_level_extension(spec, ext, mode, samples, rngs["vii"], budget, params, notes))

    return records


def _level_extension(spec, ext, mode, samples, rng, budget, params, notes) -> CheckRecord:
    p = spec.p
    t = Tally()
    chain = [spec.prefix(l) for l in range(1, len(spec) + 1)] + [spec.extended(*ext)]
    for short, long_ in zip(chain, chain[1:]):
        if mode == "exhaustive":
            rows = group_array(p, short.scale, budget=budget)
            labels = classify_array(rows, short)
            sel = labels != Z
            rows, labels = rows[sel], labels[sel]
        elif short.vacuous:
            rows, labels = np.zeros((0, 1 << short.scale), dtype=np.int64), np.zeros(0, dtype=np.int8)
        else:
            labels = rng.integers(0, p, size=samples).astype(np.int8)
            rows = np.empty((samples, 1 << short.scale), dtype=np.int64)
            for x in range(p):
                idx = np.flatnonzero(labels == x)
                if idx.size:
                    rows[idx] = sample_cell(short, x, rng, size=idx.size)
        got = classify_array(embed_rows(rows, short.scale, long_.scale), long_)
        bad = np.flatnonzero(got != labels)
        t.add(len(rows), [f"{_fmt(p, short.scale, rows[b])} not in P_{int(labels[b])}^({long_})"
                          for b in bad[:3]], len(bad))
    # x1 lies in P_x, the anchor of the extension argument
    consts = np.repeat(np.arange(p)[:, None], 1 << spec.scale, axis=1)
    got = classify_array(consts, spec)
    bad = np.flatnonzero(got != np.arange(p))
    t.add(p, [f"constant {b}*1 labelled {int(got[b])} under {spec}" for b in bad], len(bad))
    return t.record(f"shift.vii.{PART_NAMES['vii']}", _tag(spec, "vii"), params, mode, notes=list(notes))
