"""Adaptive quadtree cells for area integrals over a planar slice.

The base tree depends only on the slice and the discretization sizes: cells
that cross the boundary are split down to ``boundary_cell`` and then kept or
dropped according to whether their centroid lies in the domain, fully
interior cells are split down to ``max_cell``.  Around each evaluation point
the base leaves are graded further: any cell whose centre is closer to the
point than ``refine_radius_factor`` times its edge is split, down to
``min_cell``.  Every leaf is integrated with the centroid rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PlanarDomain, contains


class QuadratureBudgetError(RuntimeError):
    """The cell budget ran out before the requested resolution was reached."""

    def __init__(self, message: str, tolerance_estimate: float):
        super().__init__(f"{message} (achieved tolerance estimate {tolerance_estimate:.3e})")
        self.tolerance_estimate = tolerance_estimate


@dataclass(frozen=True, eq=False)
class Cells:
    centers: np.ndarray  # complex
    sizes: np.ndarray  # edge length
    interior: np.ndarray  # bool: fully inside (else centroid-gated boundary cell)
    truncated: bool = False
    boundary_size: float = 0.0

    @property
    def weights(self) -> np.ndarray:
        return self.sizes**2

    def __len__(self):
        return self.centers.size


_CHILD = np.array([-1 - 1j, 1 - 1j, -1 + 1j, 1 + 1j]) / 4.0


def _split(centers, sizes):
    kids = (centers[:, None] + sizes[:, None] * _CHILD[None, :]).ravel()
    return kids, np.repeat(sizes / 2.0, 4)


def build_base_cells(domain: PlanarDomain, max_cell: float, boundary_cell: float,
                     cell_budget: int) -> Cells:
    x0, x1, y0, y1 = domain.bounding_box
    side = max(x1 - x0, y1 - y0) * 1.001
    centers = np.array([0.5 * (x0 + x1) + 0.5j * (y0 + y1)])
    size = side
    keep_c, keep_s, keep_i = [], [], []
    count = 0
    truncated = False
    while centers.size:
        half_diag = size / np.sqrt(2.0)
        dist = domain.boundary_distance(centers)
        crossing = dist <= half_diag * (1 + 1e-9) + 1e-12
        clear = ~crossing
        inside = np.zeros(centers.size, bool)
        if clear.any():
            inside[clear] = contains(domain, centers[clear])
        interior = clear & inside
        finish_interior = interior & (size <= max_cell)
        finish_boundary = crossing & (size <= boundary_cell)
        grow = (interior & ~finish_interior) | (crossing & ~finish_boundary)
        if count + finish_interior.sum() + finish_boundary.sum() + 4 * grow.sum() > cell_budget:
            # out of budget: close everything at this level
            truncated = True
            finish_interior = interior
            finish_boundary = crossing
            grow[:] = False
        keep_c.append(centers[finish_interior])
        keep_s.append(np.full(finish_interior.sum(), size))
        keep_i.append(np.ones(finish_interior.sum(), bool))
        if finish_boundary.any():
            cand = centers[finish_boundary]
            cand = cand[contains(domain, cand)]
            keep_c.append(cand)
            keep_s.append(np.full(cand.size, size))
            keep_i.append(np.zeros(cand.size, bool))
        count = sum(c.size for c in keep_c)
        centers, _ = _split(centers[grow], np.full(grow.sum(), size))
        if truncated:
            boundary_size = size
            break
        size = size / 2.0
    else:
        boundary_size = size * 2.0
    return Cells(np.concatenate(keep_c), np.concatenate(keep_s), np.concatenate(keep_i),
                 truncated, boundary_size)


def refine_near(base: Cells, domain: PlanarDomain, z: complex, factor: float,
                min_cell: float, cell_budget: int):
    """Grade the base cells towards ``z``.

    Returns the indices of the base leaves kept unchanged and the new,
    finer cells replacing the others.
    """
    centers, sizes, interior = base.centers, base.sizes, base.interior
    hot = (np.abs(centers - z) < factor * sizes) & (sizes > min_cell * (1 + 1e-9))
    kept = np.flatnonzero(~hot)
    new_c, new_s, new_i = [], [], []
    c, s, i = centers[hot], sizes[hot], interior[hot]
    total = kept.size
    truncated = base.truncated
    while c.size:
        kc, ks = _split(c, s)
        ki = np.repeat(i, 4)
        gated = ~ki
        if gated.any():
            ok = np.ones(kc.size, bool)
            ok[gated] = contains(domain, kc[gated])
            kc, ks, ki = kc[ok], ks[ok], ki[ok]
        hot = (np.abs(kc - z) < factor * ks) & (ks > min_cell * (1 + 1e-9))
        if total + kc.size > cell_budget:
            truncated = True
            hot[:] = False
        new_c.append(kc[~hot])
        new_s.append(ks[~hot])
        new_i.append(ki[~hot])
        total += int((~hot).sum())
        c, s, i = kc[hot], ks[hot], ki[hot]
    cat = (lambda xs, dt: np.concatenate(xs) if xs else np.zeros(0, dt))
    fresh = Cells(cat(new_c, complex), cat(new_s, float), cat(new_i, bool),
                  truncated, base.boundary_size)
    return kept, fresh
