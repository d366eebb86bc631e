import json

import numpy as np
import pytest

from dbarprod import (FieldFunction, PlanarDomain, ProductDomain, apply_chain,
                      arclength_reparametrize, coordinate, dbar_residual, ellipse,
                      holomorphy_check, multi_index, pompeiu_check, polydisc, product_grid,
                      prop31_identity, solution_01)
from dbarprod.solver import gauss_bump, polyconj

D = polydisc(2)
IDX = multi_index(2, (1, True))


def with_dbar(func, dfunc, name):
    return FieldFunction(func, derivatives={IDX: dfunc}, order=1, name=name)


HOLO = with_dbar(lambda z1, z2: z1**3 - 2 * z1 + 0 * z2, lambda z1, z2: 0 * z1 + 0 * z2, "holo")
CONJ = with_dbar(lambda z1, z2: np.conj(z1) + 0 * z2, lambda z1, z2: 1 + 0 * z1 + 0 * z2, "conj")
ABS2 = with_dbar(lambda z1, z2: np.abs(z1) ** 2 + 0 * z2, lambda z1, z2: z1 + 0 * z2, "abs2")


@pytest.fixture(scope="module")
def ellipse_first():
    return ProductDomain((PlanarDomain((ellipse(2.0, 1.0),)), D.slice(2)))


def test_pompeiu_disc_oracles():
    grid = product_grid(D, 0.25, 0.1)[::13]
    assert pompeiu_check(HOLO, 1, D, grid).max_abs_error <= 1e-8
    assert pompeiu_check(CONJ, 1, D, grid).max_abs_error <= 1e-6
    assert pompeiu_check(ABS2, 1, D, grid).max_abs_error <= 1e-3


def test_pompeiu_ellipse(ellipse_first):
    grid = product_grid(ellipse_first, 0.4, 0.15)[::17]
    for f in (HOLO, CONJ, ABS2):
        assert pompeiu_check(f, 1, ellipse_first, grid).max_abs_error <= 1e-3


def test_pompeiu_fd_fallback():
    # without an analytic dbar the check differentiates numerically
    f = FieldFunction(lambda z1, z2: np.abs(z1) ** 2 * z2, name="abs2-z2")
    grid = product_grid(D, 0.5, 0.1)[::5]
    assert pompeiu_check(f, 1, D, grid).max_abs_error <= 1e-3


def test_dbar_residual_examples():
    grid = product_grid(D, 0.5, 0.1)
    form = polyconj()
    assert dbar_residual(form.potential, form, D, grid).max_abs_error <= 1e-10
    zero = type(form)(form.f1 * 0.0, form.f2 * 0.0)
    assert dbar_residual(form.potential * 0.0, zero, D, grid).max_abs_error == 0


def test_dbar_residual_gauss_bump():
    form = gauss_bump()
    grid = product_grid(D, 0.5, 0.1)[::4]
    rep = dbar_residual(solution_01(form, D), form, D, grid)
    assert rep.passed(1e-2, relative=True)
    assert rep.scale > 0


def test_holomorphy_examples():
    grid = product_grid(D, 0.5, 0.1)[::6]
    s1 = apply_chain(FieldFunction(lambda z1, z2: np.abs(z1) * z2), D, [("S", 1)])
    assert holomorphy_check(s1, 1, D, grid).relative_error <= 1e-6
    assert abs(holomorphy_check(coordinate(1, True), 1, D, grid).max_abs_error - 1) < 1e-8
    g = apply_chain(gauss_bump().f2, D, [("S", 1), ("T", 2)])
    assert holomorphy_check(g, 1, D, grid).relative_error <= 1e-4


def test_holomorphy_of_z2_derivative():
    f = gauss_bump().f2
    g = apply_chain(f, D, [("S", 1), ("T", 2)])
    dg = g.derivative(multi_index(2, (2, False)))
    grid = product_grid(D, 0.5, 0.1)[::10]
    assert holomorphy_check(dg, 1, D, grid, h_fd=1e-3).relative_error <= 1e-4


S1T2_DATA = [
    (FieldFunction(lambda z1, z2: np.conj(z1) + 0 * z2, name="zbar1"), 1e-6),
    (FieldFunction(lambda z1, z2: z1**2 * np.conj(z2), name="holo-in-z1"), 1e-4),
    (FieldFunction(lambda z1, z2: z1.real * np.conj(z2), name="Re(z1)zbar2"), 1e-3),
]


@pytest.mark.parametrize("f,tol", S1T2_DATA, ids=[f.name for f, _ in S1T2_DATA])
def test_derivative_identity_bidisc(f, tol):
    grid = product_grid(D, 0.5, 0.1)[::10]
    assert prop31_identity(f, D, grid).max_abs_error <= tol


@pytest.mark.slow
def test_derivative_identity_disc_times_ellipse():
    dom = ProductDomain((D.slice(1), PlanarDomain((ellipse(2.0, 1.0),))))
    grid = product_grid(dom, 0.5, 0.15)[::9]
    for f, tol in S1T2_DATA:
        assert prop31_identity(f, dom, grid).max_abs_error <= max(tol, 1e-6), f.name


def test_derivative_identity_requires_unit_speed(ellipse_first):
    grid = product_grid(ellipse_first, 0.5, 0.15)[:2]
    with pytest.raises(ValueError):
        prop31_identity(S1T2_DATA[0][0], ellipse_first, grid)


def test_derivative_identity_arclength_ellipse(ellipse_first):
    unit = PlanarDomain(tuple(arclength_reparametrize(c) for c in ellipse_first.slice(1).curves))
    dom = ProductDomain((unit, D.slice(2)))
    grid = np.array([[0.3 + 0.2j, 0.1], [-0.5, -0.2j]])
    assert prop31_identity(S1T2_DATA[2][0], dom, grid).max_abs_error <= 1e-3


def test_report_serialization():
    grid = product_grid(D, 0.5, 0.1)[:4]
    rep = pompeiu_check(CONJ, 1, D, grid)
    d = json.loads(rep.to_json())
    assert d["grid_size"] == 4 and len(d["offenders"]) == 4
    assert d["config_hash"]
