#!/usr/bin/env python
"""Boundary and solid Cauchy transforms on the unit disc, checked against residues."""

import numpy as np

from dbarprod import (FieldFunction, boundary_cauchy, coordinate, interior_grid, polydisc,
                      solid_cauchy, t_one)

D = polydisc(2)
g = interior_grid(D.slice(1), 0.1, 0.1)
pts = np.column_stack([g, np.zeros_like(g)])
print(f"{g.size} evaluation points in the disc, standoff 0.1")

# S reproduces holomorphic data (Cauchy's formula) ...
f = FieldFunction(lambda z1, z2: np.exp(z1) * np.cos(2 * z1) + 0 * z2, deps={1})
err = np.abs(boundary_cauchy(f, D, 1, pts) - np.exp(g) * np.cos(2 * g))
print("S[exp(z) cos(2z)] - f       :", err.max())

# ... and kills zbar, since zbar = 1/zeta on the circle
print("S[zbar]                     :", np.abs(boundary_cauchy(coordinate(1, True), D, 1, pts)).max())

# T[1] is a pure boundary integral, and equals zbar on the disc
print("T[1] - zbar                 :", np.abs(t_one(D.slice(1), g) - np.conj(g)).max())

# the solid transform of zbar is zbar^2 / 2
v = solid_cauchy(coordinate(1, True), D, 1, pts)
exact = np.conj(g) ** 2 / 2
print("T[zbar] - zbar^2/2 (rel)    :", np.abs(v - exact).max() / np.abs(exact).max())
