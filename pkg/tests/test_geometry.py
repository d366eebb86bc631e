import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dbarprod import (EmptyGridError, GeometryError, PlanarDomain, ProductDomain, annulus,
                      arclength_reparametrize, circle, contains, curve_from_function,
                      curve_from_nodes, disc, ellipse, interior_grid, product_grid,
                      smoothed_square, winding_number)
from dbarprod.geometry import BoundaryCurve, curve_point


def test_curve_point_circle():
    c = circle()
    assert curve_point(c, 0.0) == 1 + 0j
    assert abs(curve_point(c, np.pi / 2) - 1j) < 1e-12
    assert abs(curve_point(circle(1.0, 2.0), np.pi) - (-1.0)) < 1e-12


def test_curve_point_node_exact():
    c = ellipse(2.0, 1.0, n=64)
    assert curve_point(c, c.params[5]) == c.nodes[5]
    assert curve_point(c, c.params[5] + 2 * np.pi) == c.nodes[5]


def test_arclength_unit_circle_unchanged():
    c = circle()
    a = arclength_reparametrize(c)
    assert np.max(np.abs(np.abs(a.derivative_nodes) - 1)) < 1e-8
    assert abs(a.closed_length - 2 * np.pi) < 1e-10
    assert np.max(np.abs(a.nodes - c.nodes)) < 1e-8


def test_arclength_circle_radius_two():
    a = arclength_reparametrize(circle(0.0, 2.0))
    assert abs(a.closed_length - 4 * np.pi) < 1e-10
    assert np.max(np.abs(np.abs(a.derivative_nodes) - 1)) < 1e-8


def test_arclength_ellipse_length_oracle():
    # oracle: adaptive quadrature of |zeta'(t)|
    length, _ = quad(lambda t: np.hypot(2 * np.sin(t), np.cos(t)), 0, 2 * np.pi,
                     epsabs=1e-13, epsrel=1e-13, limit=200)
    a = arclength_reparametrize(ellipse(2.0, 1.0))
    assert abs(a.closed_length - length) < 1e-8
    assert np.max(np.abs(np.abs(a.derivative_nodes) - 1)) < 1e-8
    assert a.orientation == "positive"
    # same point set: every node lies on the ellipse
    x, y = a.nodes.real, a.nodes.imag
    assert np.max(np.abs((x / 2) ** 2 + y**2 - 1)) < 1e-10


def test_arclength_idempotent_and_conjugate_identity():
    a = arclength_reparametrize(ellipse(2.0, 1.0))
    b = arclength_reparametrize(a)
    assert np.max(np.abs(a.nodes - b.nodes)) < 1e-8
    d = a.derivative_nodes
    assert np.max(np.abs(d * np.conj(d) - 1)) < 1e-8


def test_arclength_degenerate_rejected():
    c = circle()
    stalled = BoundaryCurve(c.nodes, np.where(np.arange(c.n) == 3, 0, c.derivative_nodes))
    with pytest.raises(GeometryError):
        arclength_reparametrize(stalled)


def test_curve_validation():
    with pytest.raises(GeometryError):
        curve_from_nodes(np.exp(1j * np.linspace(0, 2 * np.pi, 15, endpoint=False)))
    with pytest.raises(GeometryError):
        curve_from_function(lambda t: np.exp(1j * t), lambda t: 2j * np.exp(1j * t), 64)
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    with pytest.raises(GeometryError):  # figure eight
        curve_from_nodes(np.sin(t) + 1j * np.sin(2 * t))


def test_contains_examples():
    d = disc()
    assert contains(d, 0j)
    assert not contains(d, 2 + 0j)
    assert not contains(annulus(0.5, 1.0), 0.25 + 0j)
    assert contains(annulus(0.5, 1.0), 0.75j)
    assert not contains(d, 1.0 + 0j)


def test_contains_matches_predicate():
    rng = np.random.default_rng(1)
    z = rng.uniform(-1.5, 1.5, 10_000) + 1j * rng.uniform(-1.5, 1.5, 10_000)
    c, r = 0.2 - 0.1j, 0.9
    dom = disc(c, r)
    truth = np.abs(z - c) < r
    keep = np.abs(np.abs(z - c) - r) > 1e-10
    assert np.count_nonzero(contains(dom, z)[keep] != truth[keep]) == 0


def test_contains_agrees_with_winding_number():
    dom = PlanarDomain((smoothed_square(),))
    g = np.linspace(-1.4, 1.4, 41)
    z = (g[:, None] + 1j * g[None, :]).ravel()
    z = z[dom.boundary_distance(z) > 0.05]
    w = np.rint(winding_number(dom, z))
    assert np.array_equal(contains(dom, z), w == 1)


def test_holes_oriented_clockwise():
    a = annulus()
    assert a.curves[0].orientation == "positive"
    assert a.curves[1].orientation == "negative"
    assert abs(a.area - np.pi * 0.75) < 1e-10
    with pytest.raises(GeometryError):
        PlanarDomain((circle(), circle(2.0, 0.5)))


def test_interior_grid_examples():
    d = disc()
    assert 0j in interior_grid(d, 0.5, 0.1)
    # the origin sits at distance 1 from every node, so only a standoff
    # beyond the inradius empties the grid
    assert interior_grid(d, 0.5, 0.95).tolist() == [0j]
    with pytest.raises(EmptyGridError):
        interior_grid(d, 0.5, 1.05)
    g = interior_grid(d, 0.25, 0.2)
    assert np.all(np.abs(g) <= 0.8 + 1e-12)


def test_interior_grid_row_major():
    g = interior_grid(disc(), 0.25, 0.1)
    keys = list(zip(g.imag, g.real))
    assert keys == sorted(keys)


def test_product_grid_shape():
    dom = ProductDomain((disc(), disc()))
    g1 = interior_grid(disc(), 0.5, 0.1)
    g = product_grid(dom, 0.5, 0.1)
    assert g.shape == (g1.size**2, 2)
    assert np.all(g[: g1.size, 0] == g1[0])


def test_product_domain_arity():
    with pytest.raises(GeometryError):
        ProductDomain((disc(),))
    with pytest.raises(ValueError):
        ProductDomain((disc(), disc())).slice(3)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-1, 1), st.floats(-1, 1))
def test_disc_area_and_perimeter(r, cx, cy):
    d = disc(complex(cx, cy), r, 128)
    assert abs(d.area - np.pi * r * r) < 1e-9 * r * r
    assert abs(d.perimeter - 2 * np.pi * r) < 1e-9 * r


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 2.0), st.floats(0.5, 1.0))
def test_arclength_preserves_length_and_area(a, b):
    c = ellipse(a, b, n=1024)
    u = arclength_reparametrize(c)
    assert abs(u.closed_length - c.closed_length) < 1e-9 * c.closed_length
    assert abs(u.signed_area - np.pi * a * b) < 1e-9 * a * b
