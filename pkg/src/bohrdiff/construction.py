"""The dense set A with (A - A) missing the Bohr-dense set S, truncated at level L.

A = union over x in E and l <= L of P_x for the prefix spec (n_1, m_1), ..., (n_l, m_l),
S = union over i <= L of V(n_i, k_i). The checks below exercise the disjointness
(A + S) & A = {} pair by pair, the exact density bookkeeping, and the finite
counterpart of the statement that sets above the density threshold have A - A = G.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .field import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    GroupElement,
    _check_budget,
    as_rows,
    at_scale,
    check_prime,
    digits_to_index,
    format_element,
    group_array,
    group_order,
    index_to_digits,
)
from .hamming import BallSpec, ball_array, in_S_union, sample_ball
from .partition import (
    Z,
    PartitionSpec,
    VacuousLevelWarning,
    _quiet_spec,
    cell_density,
    classify,
    classify_array,
    concatenation_bound,
    count_cell,
    sample_cell,
    DEFAULT_MAX_DIGITS,
)
from .report import CheckRecord, Tally

BATCH = 10_000


def delta(p: int) -> Fraction:
    """Density threshold: 1/2 for p = 2, 1/2 - 1/(2p) for odd p."""
    p = check_prime(p)
    return Fraction(1, 2) if p == 2 else Fraction(1, 2) - Fraction(1, 2 * p)


def default_E(p: int) -> frozenset[int]:
    return frozenset(range(1, p, 2))


@dataclass(frozen=True)
class ConstructionParams:
    p: int
    levels: tuple[tuple[int, int, int], ...]
    E: frozenset[int] | None = None
    L: int | None = None
    epsilon: Fraction = Fraction(1, 10)

    def __post_init__(self):
        p = check_prime(self.p)
        levels = tuple((int(n), int(m), int(k)) for n, m, k in self.levels)
        object.__setattr__(self, "levels", levels)
        for n, m, k in levels:
            if not 0 <= k < m:
                raise ValueError(f"need 0 <= k < m at every level, got (n={n}, m={m}, k={k})")
        E = default_E(p) if self.E is None else frozenset(int(x) % p for x in self.E)
        if not E:
            raise ValueError("E must be non-empty")
        if any((x + 1) % p in E for x in E):
            raise ValueError(f"E = {sorted(E)} meets E + 1")
        object.__setattr__(self, "E", E)
        L = len(levels) if self.L is None else int(self.L)
        if not 1 <= L <= len(levels):
            raise ValueError(f"truncation level must lie in 1..{len(levels)}, got {L}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        spec = self.spec(len(levels))  # validates the scales
        if spec.vacuous:
            warnings.warn(f"levels {spec.vacuous_levels()} of {spec} are vacuous; every cell is empty",
                          VacuousLevelWarning, stacklevel=3)

    @classmethod
    def from_radii(cls, p: int, scales: Sequence[int], radii: Sequence[int], **kw) -> "ConstructionParams":
        """Levels with the default margins m_i = 3 k_i."""
        return cls(p, tuple((n, 3 * k, k) for n, k in zip(scales, radii)), **kw)

    @classmethod
    def parse_levels(cls, p: int, text: str, **kw) -> "ConstructionParams":
        """Levels from the text form "n:m:k,..."."""
        levels = tuple(tuple(int(v) for v in tok.split(":")) for tok in text.split(",") if tok.strip())
        if any(len(lv) != 3 for lv in levels):
            raise ValueError(f"expected n:m:k triples, got {text!r}")
        return cls(p, levels, **kw)

    def spec(self, l: int | None = None) -> PartitionSpec:
        l = self.L if l is None else l
        return _quiet_spec(self.p, tuple((n, m) for n, m, _ in self.levels[:l]))

    def reduced_spec(self, r: int, times: int = 1) -> PartitionSpec:
        """(n_1, m_1 - t k_1), ..., (n_r, m_r - t k_r) with t = ``times``."""
        return _quiet_spec(self.p, tuple((n, m - times * k) for n, m, k in self.levels[:r]))

    def balls(self, L: int | None = None) -> list[BallSpec]:
        L = self.L if L is None else L
        return [BallSpec(n, k) for n, _, k in self.levels[:L]]

    def scale(self, l: int | None = None) -> int:
        return self.levels[(self.L if l is None else l) - 1][0]

    def describe(self) -> dict:
        return {"p": self.p, "levels": ",".join(f"{n}:{m}:{k}" for n, m, k in self.levels),
                "E": ",".join(map(str, sorted(self.E))), "L": self.L,
                "epsilon": f"{self.epsilon.numerator}/{self.epsilon.denominator}"}


PRESETS = {
    "p2-single": ConstructionParams(2, ((3, 2, 1),)),
    "p2-double": ConstructionParams(2, ((3, 2, 1), (6, 2, 1))),
    "p3-single": ConstructionParams(3, ((3, 2, 1),)),
    "p3-double": ConstructionParams(3, ((4, 2, 1), (8, 2, 1))),
}


# -- membership ----------------------------------------------------------------

def _truncation(params: ConstructionParams, L: int | None) -> int:
    L = params.L if L is None else L
    if not 1 <= L <= len(params.levels):
        raise ValueError(f"truncation level must lie in 1..{len(params.levels)}")
    return L


def in_A(g: GroupElement, params: ConstructionParams, L: int | None = None) -> bool:
    L = _truncation(params, L)
    if g.p != params.p:
        raise ValueError("prime mismatch")
    if at_scale(g, params.scale(L)) is None:
        raise ValueError(f"element is not constant on scale-{params.scale(L)} cylinders")
    for l in range(1, L + 1):
        h = at_scale(g, params.scale(l))
        if h is not None and classify(h, params.spec(l)) in params.E:
            return True
    return False


def in_S(g: GroupElement, params: ConstructionParams, L: int | None = None) -> bool:
    L = _truncation(params, L)
    if at_scale(g, params.scale(L)) is None:
        raise ValueError(f"element is not constant on scale-{params.scale(L)} cylinders")
    return in_S_union(g, params.balls(L), shift=1)


def in_A_array(rows: np.ndarray, n: int, params: ConstructionParams, L: int | None = None) -> np.ndarray:
    """in_A for every row of a scale-n digit array (n <= n_L)."""
    L = _truncation(params, L)
    rows = np.asarray(rows)
    if n > params.scale(L):
        raise ValueError(f"rows at scale {n} exceed the truncation scale {params.scale(L)}")
    out = np.zeros(len(rows), dtype=bool)
    E = np.array(sorted(params.E))
    for l in range(1, L + 1):
        nl = params.scale(l)
        if nl >= n:
            lifted = np.repeat(rows, 1 << (nl - n), axis=1)
            ok = np.ones(len(rows), dtype=bool)
        else:
            blk = rows.reshape(len(rows), 1 << nl, -1)
            ok = (blk == blk[:, :, :1]).all(axis=(1, 2))
            lifted = blk[:, :, 0]
        if ok.any():
            labels = classify_array(lifted[ok], params.spec(l))
            out[np.flatnonzero(ok)] |= np.isin(labels, E)
    return out


# -- disjointness ----------------------------------------------------------------

def _lift(rows: np.ndarray, n_from: int, n_to: int) -> np.ndarray:
    return np.repeat(rows, 1 << (n_to - n_from), axis=1)


@dataclass
class _PairBatch:
    trials: int = 0
    label_bad: list = field(default_factory=list)
    label_n: int = 0
    avoid_bad: list = field(default_factory=list)
    avoid_n: int = 0
    second_bad: list = field(default_factory=list)
    second_n: int = 0
    second_trials: int = 0


def _check_pairs(params, L, l, j, x, A, S, S2, batch: _PairBatch):
    """a in P_x (prefix l), s in V(n_j, k_j), optional s2 from S2 at the same scale."""
    p = params.p
    r = max(l, j)
    n_r = params.scale(r)
    a = _lift(A, params.scale(l), n_r).astype(np.int64)
    s = _lift(S, params.scale(j), n_r).astype(np.int64)
    sums = (a + s) % p
    want = (x + 1) % p
    got = classify_array(sums, params.reduced_spec(r))
    bad = np.flatnonzero(got != want)
    batch.trials += len(sums)
    batch.label_n += bad.size
    for i in bad[:3]:
        batch.label_bad.append(f"a={format_element(GroupElement(p, n_r, a[i]))} "
                               f"s={format_element(GroupElement(p, n_r, s[i]))} label={int(got[i])}")
    inA = in_A_array(sums, n_r, params, L)
    bad = np.flatnonzero(inA)
    batch.avoid_n += bad.size
    for i in bad[:3]:
        batch.avoid_bad.append(f"a+s={format_element(GroupElement(p, n_r, sums[i]))} lies in A")
    if S2 is not None:
        j2, S2rows = S2
        r2 = max(r, j2)
        n2 = params.scale(r2)
        t = (_lift(sums, n_r, n2) + _lift(S2rows, params.scale(j2), n2).astype(np.int64)) % p
        got2 = classify_array(t, params.reduced_spec(r2, times=2))
        bad = np.flatnonzero(got2 != (x + 2) % p)
        batch.second_trials += len(t)
        batch.second_n += bad.size
        for i in bad[:3]:
            batch.second_bad.append(f"a+s+s'={format_element(GroupElement(p, n2, t[i]))} label={int(got2[i])}")


def _second_shift_ok(params: ConstructionParams, L: int) -> bool:
    return all(m >= 2 * k for _, m, k in params.levels[:L])


def verify_disjointness(params: ConstructionParams, L: int | None = None, mode: str = "exhaustive",
                        samples: int = 100_000, seed: int = 0, budget: int | None = DEFAULT_BUDGET,
                        threads: int = 1) -> list[CheckRecord]:
    """Check a + s lands in P_{x+1} of the margin-reduced spec and outside A.

    Also checks that a + s + s' lands in P_{x+2} of the twice-reduced spec when
    m_j >= 2 k_j, which keeps (A + S) - (A + S) away from S as well.
    """
    L = _truncation(params, L)
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    p = params.p
    for l in range(1, L + 1):
        if params.spec(l).vacuous:
            raise ValueError(f"level prefix {params.spec(l)} is vacuous; its cells are empty")
    E = sorted(params.E)
    second = _second_shift_ok(params, L)
    combos = [(l, j, x) for l in range(1, L + 1) for j in range(1, L + 1) for x in E]
    batch = _PairBatch()
    pdict = dict(params.describe(), L=L)

    if mode == "exhaustive":
        cells = {}
        for l in range(1, L + 1):
            spec = params.spec(l)
            rows = group_array(p, spec.scale, budget=budget)
            labels = classify_array(rows, spec)
            for x in E:
                cells[l, x] = rows[labels == x]
        balls = {j: ball_array(p, b, centre=1, budget=budget) for j, b in enumerate(params.balls(L), 1)}
        for l, j, x in combos:
            A, S = cells[l, x], balls[j]
            _check_budget(len(A) * len(S), budget, "pairs")
            ia, iu = np.meshgrid(np.arange(len(A)), np.arange(len(S)), indexing="ij")
            ia, iu = ia.reshape(-1), iu.reshape(-1)
            _check_pairs(params, L, l, j, x, A[ia], S[iu], None, batch)
            if second:
                for j2 in range(1, L + 1):
                    S2 = balls[j2]
                    _check_budget(len(ia) * len(S2), budget, "triples")
                    i3, k3 = np.meshgrid(np.arange(len(ia)), np.arange(len(S2)), indexing="ij")
                    i3, k3 = i3.reshape(-1), k3.reshape(-1)
                    sub = _PairBatch()
                    _check_pairs(params, L, l, j, x, A[ia[i3]], S[iu[i3]], (j2, S2[k3]), sub)
                    batch.second_trials += sub.second_trials
                    batch.second_n += sub.second_n
                    batch.second_bad += sub.second_bad
        coverage = "full"
    else:
        pdict.update(samples=samples, seed=seed)
        plan = [(lo, min(samples, lo + BATCH)) for lo in range(0, samples, BATCH)]
        seeds = np.random.SeedSequence(seed).spawn(len(plan))

        def run(i):
            rng = np.random.default_rng(seeds[i])
            lo, hi = plan[i]
            pick = rng.integers(0, len(combos), size=hi - lo)
            j2s = rng.integers(1, L + 1, size=hi - lo)
            out = _PairBatch()
            for c, (l, j, x) in enumerate(combos):
                for j2 in range(1, L + 1):
                    cnt = int(((pick == c) & (j2s == j2)).sum())
                    if not cnt:
                        continue
                    A = sample_cell(params.spec(l), x, rng, cnt)
                    S = sample_ball(p, params.balls(L)[j - 1], rng, cnt, centre=1)
                    S2 = (j2, sample_ball(p, params.balls(L)[j2 - 1], rng, cnt, centre=1)) if second else None
                    _check_pairs(params, L, l, j, x, A, S, S2, out)
            return out

        workers = max(1, int(threads))
        if workers == 1:
            parts = [run(i) for i in range(len(plan))]
        else:
            with ThreadPoolExecutor(workers) as ex:
                parts = list(ex.map(run, range(len(plan))))
        for part in parts:  # merged in plan order, so output ignores the thread count
            batch.trials += part.trials
            batch.label_n += part.label_n
            batch.label_bad += part.label_bad
            batch.avoid_n += part.avoid_n
            batch.avoid_bad += part.avoid_bad
            batch.second_trials += part.second_trials
            batch.second_n += part.second_n
            batch.second_bad += part.second_bad
        coverage = "concatenation-subset"

    notes = [f"A and S truncated at level {L}", f"coverage={coverage}"]
    out = [
        CheckRecord("construction.shifted_label", "union-shift", pdict, mode, batch.trials,
                    batch.label_n, batch.label_bad[:3], notes=list(notes)),
        CheckRecord("construction.sum_avoids_A", "difference-set-avoids-S", pdict, mode, batch.trials,
                    batch.avoid_n, batch.avoid_bad[:3], notes=list(notes)),
    ]
    if second:
        out.append(CheckRecord("construction.thickened_set_avoidance", "thickened-set-avoids-S", pdict, mode,
                               batch.second_trials, batch.second_n, batch.second_bad[:3], notes=list(notes)))
    return out


# -- density bookkeeping ---------------------------------------------------------

@dataclass
class DensityRow:
    level: int
    spec: str
    scale: int
    exact: bool
    cell_fraction: Fraction | None
    A_fraction: Fraction | None
    Z_fraction: Fraction | None
    log_cell_fraction: float
    concatenation_fraction: Fraction | None
    threshold: Fraction
    exceeds_threshold: bool
    identity_holds: bool | None


def density_report(params: ConstructionParams, L: int | None = None,
                   max_digits: int | None = DEFAULT_MAX_DIGITS) -> list[DensityRow]:
    """Per level: |A ∩ G^(n_l)| / |G^(n_l)| = |E| |P_x| / |G^(n_l)| and its companions."""
    L = _truncation(params, L)
    p, nE = params.p, len(params.E)
    threshold = nE * (1 - params.epsilon) / p
    rows = []
    for l in range(1, L + 1):
        spec = params.spec(l)
        dens = cell_density(spec, max_digits)
        if dens.exact is not None:
            group = p ** (1 << spec.scale)
            cells = [count_cell(spec, x, None) for x in range(p)]
            zc = count_cell(spec, Z, None)
            identity = sum(cells) + zc == group and len(set(cells)) == 1
            cell_f, z_f = dens.exact, Fraction(zc, group)
            A_f = nE * cell_f
            exceeds = A_f > threshold
        else:
            identity = cell_f = z_f = A_f = None
            exceeds = math.log(nE) + dens.log_value - dens.log_error > math.log(threshold)
        conc = None
        if l >= 2:
            try:
                conc = Fraction(concatenation_bound(spec, max_digits), p ** (1 << spec.scale))
            except BudgetExceeded:
                conc = None
        rows.append(DensityRow(l, str(spec), spec.scale, dens.exact is not None, cell_f, A_f, z_f,
                               dens.log_value, conc, threshold, bool(exceeds), identity))
    return rows


def density_records(params: ConstructionParams, L: int | None = None,
                    max_digits: int | None = DEFAULT_MAX_DIGITS) -> list[CheckRecord]:
    out = []
    for row in density_report(params, L, max_digits):
        values = {"cell_fraction": row.cell_fraction, "A_fraction": row.A_fraction,
                  "Z_fraction": row.Z_fraction, "log_cell_fraction": row.log_cell_fraction,
                  "concatenation_fraction": row.concatenation_fraction,
                  "threshold": row.threshold, "exceeds_threshold": row.exceeds_threshold}
        bad = 0 if row.identity_holds in (True, None) else 1
        if row.concatenation_fraction is not None and row.cell_fraction is not None \
                and row.concatenation_fraction > row.cell_fraction:
            bad += 1
        notes = ["exact" if row.exact else "log-space estimate"]
        if not row.exceeds_threshold:
            notes.append("below the density target at this scale; the target is asymptotic")
        out.append(CheckRecord("construction.density", "density-accounting",
                               dict(params.describe(), level=row.level, spec=row.spec),
                               "exact" if row.exact else "log-space", 1, bad,
                               exact_values=values, notes=notes))
    return out


# -- finite analogue of the threshold statement ------------------------------------

def _translation_table(p: int, N: int) -> np.ndarray:
    """table[h, g] = index of g + h."""
    G = group_array(p, N, budget=None).astype(np.int64)
    sums = (G[:, None, :] + G[None, :, :]) % p
    return digits_to_index(p, sums.reshape(-1, G.shape[1])).reshape(len(G), len(G))


def difference_set_is_group(member_masks: np.ndarray, p: int, N: int) -> np.ndarray:
    """For bitmask-encoded subsets A, whether A - A is all of G_p^(N).

    h lies in A - A iff A meets A + h.
    """
    T = group_order(p, N)
    if T > 64:
        raise ValueError("bitmask encoding needs a group of at most 64 elements")
    masks = np.asarray(member_masks, dtype=np.uint64)
    table = _translation_table(p, N)
    full = np.ones(len(masks), dtype=bool)
    for h in range(1, T):
        shifted = np.zeros_like(masks)
        for g in range(T):
            bit = (masks >> np.uint64(g)) & np.uint64(1)
            shifted |= bit << np.uint64(table[h, g])
        full &= (masks & shifted) != 0
    return full


def _popcount(masks: np.ndarray) -> np.ndarray:
    return np.unpackbits(masks.astype(">u8").view(np.uint8).reshape(-1, 8), axis=1).sum(axis=1)


def theorem2_brute(p: int, N: int, mode: str = "exhaustive", samples: int = 10_000, seed: int = 0,
                   budget: int | None = DEFAULT_BUDGET) -> list[CheckRecord]:
    """Every subset A of G_p^(N) with |A| > delta_p |G| has A - A = G."""
    p = check_prime(p)
    T = group_order(p, N)
    need = math.floor(delta(p) * T) + 1
    params = {"p": p, "N": N, "group": T, "min_size": need}
    if mode == "exhaustive":
        _check_budget(1 << T, budget, "subsets")
        masks = np.arange(1 << T, dtype=np.uint64)
        sizes = _popcount(masks)
        full = difference_set_is_group(masks, p, N)
        big = sizes >= need
        bad = np.flatnonzero(big & ~full)
        failing = sizes[~full]
        wit = [f"A={_mask_members(int(masks[i]), p, N)}" for i in bad[:3]]
        values = {"subsets": 1 << T, "above_threshold": int(big.sum()),
                  "largest_without_full_difference_set": int(failing.max()) if failing.size else 0}
        return [CheckRecord("theorem2.finite_threshold", "difference-set-threshold", params, mode,
                            int(big.sum()), int(bad.size), wit, values)]
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    params.update(samples=samples, seed=seed)
    _check_budget(T * T, budget, "difference table")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    G = group_array(p, N, budget=budget).astype(np.int64)
    tally = Tally()
    for _ in range(samples):
        size = int(rng.integers(need, T + 1))
        idx = rng.choice(T, size=size, replace=False)
        rows = G[np.sort(idx)]
        diffs = (rows[:, None, :] - rows[None, :, :]) % p
        hit = np.unique(digits_to_index(p, diffs.reshape(-1, G.shape[1])))
        ok = hit.size == T
        tally.add(1, [] if ok else [f"|A|={size} first={format_element(GroupElement(p, N, rows[0]))}"])
    return [tally.record("theorem2.finite_threshold", "difference-set-threshold", params, mode)]


def _mask_members(mask: int, p: int, N: int) -> str:
    idx = [i for i in range(group_order(p, N)) if mask >> i & 1]
    return "{" + " ".join(format_element(GroupElement(p, N, r)) for r in index_to_digits(p, N, np.array(idx, dtype=np.int64))) + "}"


@dataclass(frozen=True)
class WindowResult:
    shift: GroupElement
    count: int
    lower_bound: int

    @property
    def holds(self) -> bool:
        return self.count >= self.lower_bound


def window_density(A_members, F_members, p: int, N: int,
                   budget: int | None = DEFAULT_BUDGET) -> WindowResult:
    """The g maximizing |(A - g) ∩ F| and that maximum, with the averaging bound
    ceil(|A| |F| / |G|) it must reach."""
    T = group_order(p, N)
    A = np.zeros(T, dtype=bool)
    a_rows = as_rows(A_members, p, N)
    if len(a_rows):
        A[digits_to_index(p, a_rows)] = True
    F = np.unique(as_rows(F_members, p, N).astype(np.int64), axis=0)
    _check_budget(T * max(1, len(F)), budget, "window evaluations")
    G = group_array(p, N, budget=budget).astype(np.int64)
    counts = np.zeros(T, dtype=np.int64)
    for f in F:
        counts += A[digits_to_index(p, (G + f) % p)]
    best = int(np.argmax(counts))
    bound = -(-int(A.sum()) * len(F) // T)
    return WindowResult(GroupElement(p, N, G[best]), int(counts[best]), bound)
