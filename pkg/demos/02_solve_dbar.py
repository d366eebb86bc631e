#!/usr/bin/env python
"""Solve dbar u = f on the bidisc for a few closed (0,1) forms and check the residual."""

import numpy as np

from dbarprod import dbar_residual, get_form, polydisc, product_grid, solution_01

D = polydisc(2)
grid = product_grid(D, 0.4, 0.1)
print("grid:", grid.shape)

for name in ("polyconj", "gauss-bump", "mixed-poly"):
    form = get_form(name)
    u = solution_01(form, D)
    rep = dbar_residual(u, form, D, grid)
    line = f"{name:12s} residual {rep.max_abs_error:.2e} (relative {rep.relative_error:.2e})"
    if form.potential is not None:
        # the solution differs from the known primitive by a holomorphic function;
        # for polyconj the difference is zero
        gap = np.abs(u.at(grid) - form.potential.at(grid)).max()
        line += f", |u - primitive| {gap:.2e}"
    print(line)

# forms that are not closed are refused
from dbarprod import ClosednessError, Form01, coordinate, constant

try:
    solution_01(Form01(coordinate(2, True), constant(0.0), name="open"), D)
except ClosednessError as exc:
    print("rejected:", exc)
