"""Walk through the biased-count partition at a single level and then two levels.

Run with:  python demos/partition_cells.py
"""
import numpy as np

from bohrdiff.field import constant, format_element, group_array
from bohrdiff.partition import Z, PartitionSpec, classify, classify_array, count_cell, sample_cell, z_bound

# A level (n, m) looks at the 2^n digits of an element and asks which residues
# appear noticeably often. Over F_2 at (3, 2) there are 256 elements.
spec = PartitionSpec(2, ((3, 2),))
rows = group_array(2, 3)
labels = classify_array(rows, spec)
for lab in (0, 1, Z):
    print(f"label {lab:>2}: {int((labels == lab).sum())} elements (closed form {count_cell(spec, lab)})")

# constants land in the cell of their own value
for c in (0, 1):
    print(format_element(constant(2, 3, c)), "->", classify(constant(2, 3, c), spec))

# the unlabelled part stays below a crude combinatorial bound
print("unlabelled", count_cell(spec, Z), "<= bound", z_bound(2, 3, 2))

# Two levels: the outer level reads the labels of the inner blocks.
two = PartitionSpec(2, ((3, 2), (6, 2)))
rng = np.random.default_rng(1)
sample = sample_cell(two, 1, rng, 5)
print("five members of cell 1 at scale 6, re-classified:", classify_array(sample, two).tolist())
