import numpy as np
from hypothesis import given, settings, strategies as st

from dbarprod import PlanarDomain, disc, ellipse
from dbarprod.quadtree import build_base_cells, refine_near


def test_base_cells_cover_area():
    d = disc()
    cells = build_base_cells(d, 1 / 16, 1 / 256, 2**20)
    assert not cells.truncated
    assert abs(cells.weights.sum() - np.pi) < 5e-3
    # centroids lie inside the domain
    assert np.all(np.abs(cells.centers) < 1)


def test_budget_truncation_flagged():
    cells = build_base_cells(disc(), 1 / 16, 1 / 1024, 2000)
    assert cells.truncated
    assert len(cells) <= 2000


def test_refine_preserves_area():
    d = PlanarDomain((ellipse(2.0, 1.0),))
    base = build_base_cells(d, 1 / 8, 1 / 128, 2**20)
    kept, fresh = refine_near(base, d, 0.3 + 0.2j, 8.0, 1e-5, 2**20)
    total = base.weights[kept].sum() + fresh.weights.sum()
    assert abs(total - base.weights.sum()) < 1e-9
    assert fresh.sizes.min() <= 2e-5


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(-0.5, 0.5))
def test_graded_cells_near_point(x, y):
    d = disc()
    z = complex(x, y) * 0.9
    base = build_base_cells(d, 1 / 8, 1 / 64, 2**20)
    kept, fresh = refine_near(base, d, z, 8.0, 1e-4, 2**20)
    centers = np.concatenate([base.centers[kept], fresh.centers])
    sizes = np.concatenate([base.sizes[kept], fresh.sizes])
    # every surviving cell is either far from z or already at the floor
    ok = (np.abs(centers - z) >= 8.0 * sizes) | (sizes <= 1e-4 * (1 + 1e-9))
    assert ok.all()
