"""Exact density of cell 0 over F_2 with margin 1 as the scale grows.

Run with:  python demos/density_trend.py
"""
from fractions import Fraction

from bohrdiff.partition import PartitionSpec, count_cell

for n in range(2, 12):
    spec = PartitionSpec(2, ((n, 1),))
    frac = Fraction(count_cell(spec, 0), 2 ** (1 << n))
    print(f"n={n:>2}  density {float(frac):.6f}")
# The limit is 1/2: almost every element has a clear majority digit.
