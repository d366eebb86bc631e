#!/usr/bin/env python
"""Sampled Hoelder semi-norms: grid pairs plus dyadic pairs at a hotspot."""

import numpy as np

from dbarprod import (FieldFunction, coordinate, default_pairs, dyadic_pairs, holder_seminorm,
                      polydisc, product_grid)

D = polydisc(2)
grid = product_grid(D, 0.4, 0.1)

# Lipschitz data: the alpha-quotient is |delta|^(1 - alpha), largest at the widest pair
pairs = dyadic_pairs([[0.3, 0.0]], 1, range(1, 14))
print("H^0.5[zbar1] on dyadic pairs:", holder_seminorm(coordinate(1, True), pairs, 0.5).full_seminorm,
      "expected", 0.5**0.5)

# a square-root cusp at z1 = 1
cusp = FieldFunction(lambda z1, z2: np.sqrt(np.abs(z1 - 1)) + 0 * z2)
near = dyadic_pairs([[1 - 1e-6, 0.0]], 1, range(1, 17), directions=(-1.0,))
for alpha in (0.3, 0.5, 0.7):
    rep = holder_seminorm(cusp, near, alpha)
    print(f"H^{alpha}[|z1 - 1|^0.5] = {rep.full_seminorm:10.4f}  per variable {rep.directional_seminorms}")

# the full estimate never exceeds the sum of the directional ones
f = coordinate(1, True) * coordinate(2) + coordinate(2, True)
rep = holder_seminorm(f, default_pairs(D, grid, [[0.3, 0.0]], 0.1), 0.5)
print("full", rep.full_seminorm, "<= sum", sum(rep.directional_seminorms))
