"""Exact two-level minimization, checked against exhaustive evaluation.

The minimizer reduces any truth table to an irredundant OR-of-ANDs over
prime implicants; for up to six variables the cover is provably minimum.
"""

import numpy as np

from actinmachine import TruthTable, evaluate, format_dnf, minimize

print("classics (2 variables):")
for name, bits in [
    ("AND", (0, 0, 0, 1)),
    ("OR", (0, 1, 1, 1)),
    ("XOR", (0, 1, 1, 0)),
    ("constant 1", (1, 1, 1, 1)),
]:
    dnf = minimize(TruthTable(2, bits))
    print(f"  {name:11s} -> {format_dnf(dnf)}")

print("\na 4-variable table with a non-obvious cover:")
# ON-set chosen so no single product dominates
table = TruthTable(4, tuple(int(v in {0, 4, 5, 7, 10, 11, 13, 15}) for v in range(16)))
dnf = minimize(table)
print(f"  minimized: {format_dnf(dnf)}  ({len(dnf.implicants)} products)")

print("\nrandom 6-variable tables, verified on all 64 inputs:")
rng = np.random.default_rng(12)
for trial in range(3):
    table = TruthTable(6, tuple(int(b) for b in rng.random(64) < 0.4))
    dnf = minimize(table)
    ok = all(evaluate(dnf, format(v, "06b")) == table(v) for v in range(64))
    print(f"  table {trial}: {len(table.on_set):2d} minterms -> "
          f"{len(dnf.implicants):2d} products, equivalent={ok}")
    assert ok
