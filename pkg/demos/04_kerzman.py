#!/usr/bin/env python
"""The datum dbar((z1 - 1)^(k + alpha) zbar2): the solution gains no Hoelder exponent.

Quotients at exponent alpha stay flat as the pairs approach z1 = 1, while
quotients at alpha' > alpha grow like 2^(m (alpha' - alpha)).
"""

from dbarprod import KerzmanDatum, kerzman_scan

for k in (0, 1):
    rep = kerzman_scan(KerzmanDatum(k, 0.5), 0.75, range(3, 9))
    print(f"k = {k}, boundary nodes {rep.meta['boundary_nodes']}")
    print("   m   q(alpha')   q(alpha)    error vs exact")
    q = rep.quantities
    for i, m in enumerate(rep.values):
        print(f"{m:4d} {q['quotient_alpha_prime'][i]:10.5f} {q['quotient_alpha'][i]:10.5f}"
              f" {q['abs_error_vs_exact'][i]:12.2e}")
    print("   ratios:", [round(float(r), 4) for r in rep.ratios["quotient_alpha_prime"]],
          "theory", round(rep.diagnostics["theoretical_ratio"], 4))
    print("   verdicts:", rep.verdicts)
