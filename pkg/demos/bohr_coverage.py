"""Do Hamming balls around the all-ones vector meet every coset of small index?

Run with:  python demos/bohr_coverage.py
"""
from bohrdiff.bohr import contains_coset, dense_upto, union_of_translated_balls, verify_hamming_generation
from bohrdiff.hamming import BallSpec

small = union_of_translated_balls(2, 3, [BallSpec(3, 1)])
res = dense_upto(small, 3, 2, p=2)
print("V(3,1) at scale 3 meets every coset of index <= 4:", res.dense)
if not res.dense:
    print("  missed coset:", res.system.describe(), "value", res.missing)

both = union_of_translated_balls(2, 4, [BallSpec(3, 1), BallSpec(4, 2)])
res = dense_upto(both, 4, 2, p=2)
print("V(3,1) u V(4,2) at scale 4:", res.dense, f"({res.systems_checked} systems)")

# Read the other way: the complement of a ball contains a whole coset.
found = contains_coset(~small, 3, 2, p=2)
if found is not None:
    system, point = found
    print("complement of V(3,1) contains the coset through", point.tolist(), "of", system.describe())

for rec in verify_hamming_generation(2, 3, 2):
    print(rec.summary())
