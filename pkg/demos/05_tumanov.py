#!/usr/bin/env python
"""The tridisc datum (0, h(z1, z3), 0) and the z3-quotients of S1 h near z1 = 1.

The composed operator factorizes as T2 S1 f = zbar2 * S1 h, which is checked
pointwise.  The z3-quotient of |S1 h| and that of its imaginary part are
printed side by side.
"""

from dbarprod import TumanovDatum, tumanov_blowup_scan

datum = TumanovDatum(0.5)
print("extension constant M =", round(datum.M, 4))
rep = tumanov_blowup_scan(datum, (1e-1, 3e-2, 1e-2, 3e-3))
q = rep.quantities
print("   eps      |S1h| quot   Im quot    factorization   nodes")
for i, e in enumerate(rep.values):
    print(f"{e:8.0e} {q['holder_quotient'][i]:11.4f} {q['imag_part_quotient'][i]:10.4f}"
          f" {q['factorization_error'][i]:14.1e} {int(q['boundary_nodes'][i]):7d}")
print("ratios      :", [round(float(r), 3) for r in rep.ratios["holder_quotient"]])
print("Im ratios   :", [round(float(r), 3) for r in rep.ratios["imag_part_quotient"]])
print("verdicts    :", rep.verdicts)
