"""Check the label-shift facts exhaustively at one level and by sampling at two.

Run with:  python demos/shift_lemma.py
"""
import warnings

from bohrdiff.partition import PartitionSpec
from bohrdiff.shift import verify_shift_lemma

for rec in verify_shift_lemma(PartitionSpec(2, ((3, 2),)), [1]):
    print(rec.summary())

print()
for rec in verify_shift_lemma(PartitionSpec(2, ((3, 2), (6, 2))), [1, 1], mode="sampled", samples=2000, seed=0):
    print(rec.summary())

# When p*m reaches 2^n a level labels nothing, and constant membership breaks.
print()
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    spec = PartitionSpec(3, ((2, 2),))
vii = [r for r in verify_shift_lemma(spec, [1]) if r.check.startswith("shift.vii")][0]
print(vii.summary())
print("first witness:", vii.witnesses[0])
