#!/usr/bin/env python
"""Pompeiu's formula and the derivative identity for S1 T2 on a disc x ellipse."""

import numpy as np

from dbarprod import (FieldFunction, PlanarDomain, ProductDomain, arclength_reparametrize, disc,
                      ellipse, multi_index, pompeiu_check, product_grid, prop31_identity)

idx = multi_index(2, (1, True))
abs2 = FieldFunction(lambda z1, z2: np.abs(z1) ** 2 * np.cos(z2), derivatives={
    idx: lambda z1, z2: z1 * np.cos(z2)}, order=1, name="|z1|^2 cos z2")

ell = ProductDomain((PlanarDomain((ellipse(2.0, 1.0),)), disc()))
grid = product_grid(ell, 0.5, 0.15)[::5]
print("Pompeiu on ellipse x disc:", pompeiu_check(abs2, 1, ell, grid).max_abs_error)

# the derivative identity needs an arclength parametrization of the first slice
unit = PlanarDomain(tuple(arclength_reparametrize(c) for c in ell.slice(1).curves))
dom = ProductDomain((unit, disc()))
f = FieldFunction(lambda z1, z2: z1.real * np.conj(z2), name="Re(z1) zbar2")
rep = prop31_identity(f, dom, grid[:6])
print("d1 S1 T2 f  vs  S1 T2 f~ :", rep.max_abs_error)
print(rep.to_json(indent=1)[:300], "...")
