"""Large subsets of a small group have the whole group as their difference set.

Run with:  python demos/difference_sets.py
"""
import numpy as np

from bohrdiff.construction import theorem2_brute, window_density
from bohrdiff.field import group_array

for p, N in ((2, 2), (3, 1)):
    (rec,) = theorem2_brute(p, N)
    print(rec.summary())
    print("  largest subset whose difference set is not everything:",
          rec.exact_values["largest_without_full_difference_set"])

# A shifted copy of a subgroup sees at least the average share of A.
G = group_array(3, 1)
F = G[G[:, 0] == G[:, 1]]
A = G[np.random.default_rng(0).permutation(9)[:5]]
res = window_density(A, F, 3, 1)
print("best shift", res.shift.tolist(), "captures", res.count, "of A; average share", res.lower_bound)
