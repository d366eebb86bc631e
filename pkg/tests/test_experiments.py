import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbarprod import (KerzmanDatum, TrendReport, TumanovDatum, kerzman_form, kerzman_scan,
                      mcshane_extend, norm_ratio_study, polydisc, tumanov_h_tilde)
from dbarprod.experiments import (growth_ratios, mcshane_inf, nodes_for_distance,
                                  strictly_increasing, tumanov_form)
from dbarprod.cauchy import DEFAULT_CONFIG
from dbarprod.solver import check_closed, polyconj, validate_closed
from dbarprod.geometry import product_grid

D = polydisc(2)


# --- Kerzman datum

def test_kerzman_branch():
    f2 = kerzman_form(KerzmanDatum(0, 0.5)).f2
    assert abs(f2(0.0, 0.3) - 1j) < 1e-15
    for a in (0.2, 0.5, 0.9):
        assert kerzman_form(KerzmanDatum(0, a)).f2(1.0, 0.0) == 0


def test_kerzman_closed_off_singularity():
    form = kerzman_form(KerzmanDatum(0, 0.5))
    assert validate_closed(form, D) <= 1e-6
    grid = product_grid(D, 0.25, 0.1)
    grid = grid[np.abs(grid[:, 0] - 1) > 0.05]
    assert check_closed(form, D, grid) <= 1e-6


def test_kerzman_derivatives_match_fd():
    form = kerzman_form(KerzmanDatum(1, 0.5))
    from dbarprod import multi_index
    from dbarprod.fields import wirtinger

    idx = multi_index(2, (1, False))
    z = np.array([[0.2 + 0.3j, 0.1]])
    exact = form.f2.derivative(idx).at(z)
    fd = wirtinger(form.f2, 1, False).at(z)
    assert abs(exact - fd) < 1e-7


def test_kerzman_datum_validation():
    with pytest.raises(ValueError):
        KerzmanDatum(-1, 0.5)
    with pytest.raises(ValueError):
        KerzmanDatum(0, 1.0)
    with pytest.raises(ValueError):
        kerzman_scan(KerzmanDatum(0, 0.5), 0.4)


def test_kerzman_degenerate_exponent():
    rep = kerzman_scan(KerzmanDatum(0, 0.5), 0.5, levels=range(3, 6))
    q = rep.quantities
    assert q["quotient_alpha_prime"] == q["quotient_alpha"]


def test_kerzman_scan_matches_oracle():
    rep = kerzman_scan(KerzmanDatum(0, 0.5), 0.75)
    assert rep.passed, rep.verdicts
    q = np.array(rep.quantities["quotient_alpha_prime"])
    o = np.array(rep.quantities["oracle_alpha_prime"])
    assert np.max(np.abs(q - o) / o) < 1e-3
    assert np.allclose(rep.ratios["quotient_alpha_prime"], 2**0.25, rtol=1e-3)


# --- Tumanov datum

def test_h_tilde_examples():
    d = TumanovDatum(0.5)
    assert abs(tumanov_h_tilde(d, 0.1, 0.2) - 0.1**0.5) < 1e-12
    assert abs(tumanov_h_tilde(d, 0.1, 0.2) - 0.316227) < 1e-6
    assert abs(tumanov_h_tilde(d, -0.3, 0.04) - 0.2) < 1e-12
    assert abs(tumanov_h_tilde(d, 0.25, 0.25) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        tumanov_h_tilde(d, 4.0, 0.1)
    with pytest.raises(ValueError):
        tumanov_h_tilde(d, 0.1, 1.0)


def four_case(alpha, theta, lam):
    # the piecewise definition, case by case
    r = abs(lam)
    if theta <= -np.sqrt(r):
        return r**alpha
    if theta <= 0:
        return abs(theta) ** (2 * alpha)
    if theta <= r:
        return theta**alpha
    return r**alpha


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-np.pi, np.pi), st.floats(0, 0.999),
       st.floats(0, 2 * np.pi))
def test_h_tilde_matches_piecewise(alpha, theta, r, phi):
    lam = r * np.exp(1j * phi)
    assert abs(TumanovDatum(alpha).h_tilde(theta, lam) - four_case(alpha, theta, lam)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0, 0.999))
def test_h_tilde_seams(alpha, r):
    d = TumanovDatum(alpha)
    for seam in (-np.sqrt(r), 0.0, r):
        lo, hi = np.nextafter(seam, -4), np.nextafter(seam, 4)
        assert abs(d.h_tilde(lo, r) - d.h_tilde(hi, r)) < 1e-6


@pytest.fixture(scope="module")
def coarse():
    return TumanovDatum(0.5, n_angles=256, pitch=0.1)


def test_mcshane_reproduces_samples(coarse):
    i, k = [3, 100, 200], [0, 40, 77]
    z = np.column_stack([np.exp(1j * coarse.angles[i]), coarse.lattice[k]])
    z_in = z * np.array([1 - 1e-15, 1])  # just off the circle: forces the inf-convolution
    want = coarse.sample_values[i, k]
    assert np.allclose(mcshane_inf(coarse, z), want, atol=1e-12)
    assert np.allclose(mcshane_extend(coarse, z), want, atol=0)
    assert np.allclose(mcshane_extend(coarse, z_in), want, atol=1e-6)


def test_mcshane_below_every_sample_bound(coarse):
    rng = np.random.default_rng(3)
    z = 0.9 * np.sqrt(rng.uniform(size=(20, 2))) * np.exp(2j * np.pi * rng.uniform(size=(20, 2)))
    h = mcshane_inf(coarse, z)
    w1 = np.exp(1j * coarse.angles)
    dist = (np.abs(z[:, 0, None, None] - w1[None, :, None]) ** 2
            + np.abs(z[:, 1, None, None] - coarse.lattice[None, None, :]) ** 2) ** 0.5
    bound = coarse.sample_values[None] + coarse.M * dist**coarse.alpha
    assert np.all(h[:, None, None] <= bound + 1e-12)
    assert np.allclose(h, bound.reshape(20, -1).min(axis=1), atol=1e-12)


def test_mcshane_holder_constant(coarse):
    rng = np.random.default_rng(4)
    a = 0.95 * np.sqrt(rng.uniform(size=(300, 2))) * np.exp(2j * np.pi * rng.uniform(size=(300, 2)))
    b = a + 0.05 * (rng.normal(size=(300, 2)) + 1j * rng.normal(size=(300, 2)))
    b = b[np.all(np.abs(b) < 1, axis=1)]
    a = a[: len(b)]
    ha, hb = mcshane_inf(coarse, a), mcshane_inf(coarse, b)
    q = np.abs(ha - hb) / np.linalg.norm(a - b, axis=1) ** coarse.alpha
    assert q.max() <= coarse.M * (1 + 1e-9)


def test_tumanov_h_field_depends_on_z1_z3(coarse):
    h = tumanov_form(coarse).f2
    assert h.deps == frozenset({1, 3})
    p = np.array([[0.3, 0.1, 0.2j], [0.3, -0.7j, 0.2j]], dtype=complex)
    v = h.at(p)
    assert v[0] == v[1]


def test_tumanov_datum_validation():
    with pytest.raises(ValueError):
        TumanovDatum(1.5)
    with pytest.raises(ValueError):
        TumanovDatum(0.5, n_angles=7)


# --- scan plumbing

def test_trend_report_monotone_values():
    with pytest.raises(ValueError):
        TrendReport("x", "p", [1, 3, 2], {}, {})
    rep = TrendReport("x", "p", [3, 2, 1], {"q": [1.0, 2.0, 4.0]}, {"up": True},
                      {"q": growth_ratios([1.0, 2.0, 4.0])})
    assert rep.passed and rep.ratios["q"] == [2.0, 2.0]
    assert rep.to_csv().splitlines()[0] == "p,q"
    assert strictly_increasing([1, 2, 3]) and not strictly_increasing([1, 1, 2])


def test_nodes_for_distance():
    assert nodes_for_distance(0.5, DEFAULT_CONFIG) == DEFAULT_CONFIG.boundary_nodes
    n = nodes_for_distance(1e-3, DEFAULT_CONFIG)
    assert n & (n - 1) == 0 and DEFAULT_CONFIG.standoff_factor * 2 * np.pi / n <= 1e-3


def test_norm_ratio_scaling_and_skip():
    from dbarprod.solver import Form01
    from dbarprod import constant

    base = polyconj()
    zero = Form01(constant(0.0), constant(0.0), name="zero")
    rep = norm_ratio_study([base, base.scaled(3.0), base.scaled(-0.5j), zero], D,
                           spacing=0.5, compare_refined=False)
    r = rep.quantities["ratio"]
    assert abs(r[1] - r[0]) < 1e-9 * r[0] and abs(r[2] - r[0]) < 1e-9 * r[0]
    assert np.isnan(r[3]) and rep.diagnostics["skipped"] == ["zero"]


def test_norm_ratio_kerzman_finite():
    rep = norm_ratio_study([kerzman_form(KerzmanDatum(0, 0.5))], D, spacing=0.5,
                           compare_refined=False)
    assert np.isfinite(rep.quantities["ratio"][0]) and rep.quantities["ratio"][0] > 0
