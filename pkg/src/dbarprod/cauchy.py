"""Boundary Cauchy integrals S_j and solid Cauchy transforms T_j on product domains.

For a function f on D_1 x ... x D_n, with every variable except z_j frozen,

    S_j f(z) =  1/(2 pi i) \\oint_{bD_j} f(..., zeta, ...) / (zeta - z_j) d zeta
    T_j f(z) = -1/pi      \\iint_{D_j} f(..., zeta, ...) / (zeta - z_j) dA(zeta)

S_j uses the periodic trapezoid rule on every boundary curve of the slice.
T_j subtracts the singularity, T_j f = T_j[f - f(z)] + f(z) T_j[1], where
T_j[1](z) = conj(z_j) - S_j[conj(zeta)](z_j) is itself a boundary integral,
and integrates the remaining weakly singular part on an adaptive quadtree.
"""

from __future__ import annotations

import hashlib
import json
import weakref
from collections import OrderedDict
from dataclasses import asdict, dataclass, replace
from functools import lru_cache

import numpy as np

from .fields import FieldFunction
from .geometry import PlanarDomain, ProductDomain
from .parallel import parallel_map
from .quadtree import Cells, QuadratureBudgetError, build_base_cells, refine_near

__all__ = [
    "QuadratureConfig", "NearBoundaryError", "QuadratureBudgetError",
    "boundary_cauchy", "t_one", "solid_cauchy", "compose_TS",
    "boundary_operator", "solid_operator", "apply_chain",
]

# complex entries per vectorized block
_BLOCK = 2_000_000
# solid-transform values remembered per operator instance
_VALUE_CACHE = 1_000_000


class NearBoundaryError(ValueError):
    """Evaluation point outside the slice or inside the boundary standoff collar."""


@dataclass(frozen=True)
class QuadratureConfig:
    boundary_nodes: int = 512
    cell_budget: int = 2**20
    refine_radius_factor: float = 8.0
    min_cell: float = 1e-5
    max_cell: float = 1.0 / 32
    boundary_cell: float = 1.0 / 256
    standoff_factor: float = 5.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.boundary_nodes % 2 or self.boundary_nodes < 16:
            raise ValueError("boundary_nodes must be even and >= 16")
        if self.min_cell > self.boundary_cell or self.boundary_cell > self.max_cell:
            raise ValueError("need min_cell <= boundary_cell <= max_cell")

    def refined(self) -> "QuadratureConfig":
        """Doubled boundary resolution, quadrupled cell budget, halved cell sizes."""
        return replace(self, boundary_nodes=2 * self.boundary_nodes,
                       cell_budget=4 * self.cell_budget, max_cell=self.max_cell / 2,
                       boundary_cell=self.boundary_cell / 2)

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


DEFAULT_CONFIG = QuadratureConfig()


def _as_points(z, dim: int):
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 1 and arr.size == dim:
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"points must have shape (P, {dim})")
    return arr, False


@lru_cache(maxsize=64)
def _boundary(slc: PlanarDomain, n: int):
    nodes, w = slc.quadrature_nodes(n)
    return nodes, w, slc.max_node_spacing(n)


def _check_standoff(slc: PlanarDomain, zj: np.ndarray, cfg: QuadratureConfig, j: int):
    from .geometry import contains

    _, _, spacing = _boundary(slc, cfg.boundary_nodes)
    need = cfg.standoff_factor * spacing
    zj = np.unique(zj)
    dist = slc.boundary_distance(zj)
    bad = (dist < need) | ~contains(slc, zj)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise NearBoundaryError(
            f"z{j} = {zj[k]:.6g} is {dist[k]:.3g} from the boundary; standoff "
            f"{need:.3g} required with {cfg.boundary_nodes} nodes")


def _cauchy_sum(values, nodes, w, zj):
    return np.sum(values * (w / (nodes[None, :] - zj[:, None])), axis=1) / (2j * np.pi)


def _unique_rows(pts: np.ndarray):
    """Distinct rows in first-seen order and the map back to the input."""
    pts = np.ascontiguousarray(pts)
    seen: dict = {}
    back = np.fromiter((seen.setdefault(r.tobytes(), len(seen)) for r in pts),
                       dtype=np.intp, count=len(pts))
    first = np.zeros(len(seen), dtype=np.intp)
    first[back[::-1]] = np.arange(len(pts))[::-1]
    return pts[first], back


def _on_unique(fn, zj, width):
    """Apply a row-wise boundary sum to the distinct values of ``zj`` in blocks."""
    zj = np.asarray(zj, dtype=complex)
    uniq, inv = np.unique(zj, return_inverse=True)
    out = np.empty(uniq.size, dtype=complex)
    rows = max(1, _BLOCK // width)
    for s in range(0, uniq.size, rows):
        out[s:s + rows] = fn(uniq[s:s + rows])
    return out[inv.ravel()]


def _substitute(points: np.ndarray, j: int, samples: np.ndarray):
    """Broadcast coordinate lists with variable ``j`` replaced by ``samples``."""
    args = [points[:, i][:, None] for i in range(points.shape[1])]
    args[j - 1] = samples[None, :]
    return args


def _s_one(slc, zj, cfg):
    nodes, w, _ = _boundary(slc, cfg.boundary_nodes)
    return _on_unique(lambda z: _cauchy_sum(np.ones((1, nodes.size)), nodes, w, z), zj, nodes.size)


def boundary_cauchy(f: FieldFunction, domain: ProductDomain, j: int, z,
                    cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Trapezoid-rule value of S_j f at one point or at an array of points (P, dim)."""
    pts, scalar = _as_points(z, domain.dim)
    slc = domain.slice(j)
    zj = pts[:, j - 1]
    _check_standoff(slc, zj, cfg, j)
    if j not in f.deps:
        out = f.at(pts) * _s_one(slc, zj, cfg)
    else:
        uniq, back = _unique_rows(pts)
        nodes, w, _ = _boundary(slc, cfg.boundary_nodes)
        out = np.empty(len(uniq), dtype=complex)
        rows = max(1, _BLOCK // nodes.size)
        for s in range(0, len(uniq), rows):
            block = uniq[s:s + rows]
            vals = f(*_substitute(block, j, nodes))
            out[s:s + rows] = _cauchy_sum(vals, nodes, w, block[:, j - 1])
        out = out[back]
    return complex(out[0]) if scalar else out


def t_one(slc: PlanarDomain, zj, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """T_j[1] at ``zj`` on the slice, as the boundary integral conj(z) - S[conj(zeta)]."""
    arr = np.atleast_1d(np.asarray(zj, dtype=complex))
    _check_standoff(slc, arr, cfg, 0)
    nodes, w, _ = _boundary(slc, cfg.boundary_nodes)
    val = np.conj(arr) - _on_unique(
        lambda z: _cauchy_sum(np.conj(nodes)[None, :], nodes, w, z), arr, nodes.size)
    return complex(val[0]) if np.ndim(zj) == 0 else val


# base quadtrees per slice, keyed on the sizes that shape them
_BASE_CELLS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def base_cells(slc: PlanarDomain, cfg: QuadratureConfig) -> Cells:
    key = (cfg.max_cell, cfg.boundary_cell, cfg.cell_budget)
    per = _BASE_CELLS.setdefault(slc, {})
    if key not in per:
        per[key] = build_base_cells(slc, cfg.max_cell, cfg.boundary_cell, cfg.cell_budget)
    return per[key]


class _Memo:
    """Values of an expensive integrand on the base cells, keyed on the frozen variables."""

    def __init__(self, maxsize: int = 256):
        self.maxsize = maxsize
        self.store: OrderedDict = OrderedDict()

    def get(self, key, compute):
        if key in self.store:
            self.store.move_to_end(key)
            return self.store[key]
        val = compute()
        self.store[key] = val
        if len(self.store) > self.maxsize:
            self.store.popitem(last=False)
        return val


_MEMOS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _memo_for(f: FieldFunction, j: int, base: Cells) -> _Memo:
    per = _MEMOS.setdefault(f, {})
    key = (j, id(base))
    if key not in per:
        per[key] = _Memo()
    return per[key]


def _solid_group(f, slc, j, zj, rows, cfg):
    """T_j f for all points in ``rows`` (which share the value z_j)."""
    base = base_cells(slc, cfg)
    kept, fresh = refine_near(base, slc, zj, cfg.refine_radius_factor, cfg.min_cell,
                              cfg.cell_budget)
    centers = np.concatenate([base.centers[kept], fresh.centers])
    weights = np.concatenate([base.weights[kept], fresh.weights])
    gated = np.concatenate([~base.interior[kept], ~fresh.interior])
    diff = centers - zj
    kernel = np.where(diff == 0, 0.0, weights / np.where(diff == 0, 1.0, diff))
    fz = f.at(rows)
    t1 = t_one(slc, np.array([zj]), cfg)[0]
    out = np.empty(len(rows), dtype=complex)
    memo = _memo_for(f, j, base) if f.costly else None
    block = max(1, _BLOCK // max(1, centers.size))
    for s in range(0, len(rows), block):
        part = rows[s:s + block]
        if memo is None:
            vals = f(*_substitute(part, j, centers))
        else:
            vals = np.empty((len(part), centers.size), dtype=complex)
            for r, row in enumerate(part):
                key = tuple(np.delete(row, j - 1).tolist())
                on_base = memo.get(key, lambda row=row: f(*_substitute(row[None, :], j,
                                                                      base.centers))[0])
                vals[r, :kept.size] = on_base[kept]
            if fresh.centers.size:
                vals[:, kept.size:] = f(*_substitute(part, j, fresh.centers))
        g = vals - fz[s:s + block, None]
        if fresh.truncated:
            est = np.max(np.sum(np.abs(g[:, gated] * kernel[gated]), axis=1)) / np.pi
            raise QuadratureBudgetError(
                f"cell budget {cfg.cell_budget} exhausted for T{j} at z{j} = {zj:.6g}", est)
        out[s:s + block] = -np.sum(g * kernel[None, :], axis=1) / np.pi + fz[s:s + block] * t1
    return out


def solid_cauchy(f: FieldFunction, domain: ProductDomain, j: int, z,
                 cfg: QuadratureConfig = DEFAULT_CONFIG, workers=None):
    """T_j f at one point or at an array of points (P, dim).

    Points sharing the same z_j share one graded cell set; distinct z_j
    values are independent tasks for the worker pool.
    """
    pts, scalar = _as_points(z, domain.dim)
    slc = domain.slice(j)
    zj = pts[:, j - 1]
    _check_standoff(slc, zj, cfg, j)
    if j not in f.deps:
        out = f.at(pts) * t_one(slc, zj, cfg)
        return complex(out[0]) if scalar else out
    # repeated rows are common when an outer S sums over shared boundary nodes
    rows, back = _unique_rows(pts)
    keys, inverse = np.unique(rows[:, j - 1], return_inverse=True)
    inverse = inverse.ravel()
    groups = [np.flatnonzero(inverse == g) for g in range(keys.size)]
    base_cells(slc, cfg)  # build once before forking
    results = parallel_map(lambda g: _solid_group(f, slc, j, keys[g], rows[groups[g]], cfg),
                           range(keys.size), workers)
    out = np.empty(len(rows), dtype=complex)
    for idx, vals in zip(groups, results):
        out[idx] = vals
    out = out[back]
    return complex(out[0]) if scalar else out


def _operator(kind: str, f: FieldFunction, domain: ProductDomain, j: int,
              cfg: QuadratureConfig, workers=None) -> FieldFunction:
    if f.arity != domain.dim:
        raise ValueError("field arity does not match the product domain")
    cache: OrderedDict = OrderedDict()

    def solid(pts):
        if j not in f.deps:
            return solid_cauchy(f, domain, j, pts, cfg, workers)
        # T values are reused heavily (difference stencils, outer boundary sums)
        rows, back = _unique_rows(pts)
        keys = [r.tobytes() for r in rows]
        vals = np.empty(len(rows), dtype=complex)
        todo = []
        for i, k in enumerate(keys):
            if k in cache:
                vals[i] = cache[k]
            else:
                todo.append(i)
        if todo:
            vals[todo] = solid_cauchy(f, domain, j, rows[todo], cfg, workers)
            for i in todo:
                cache[keys[i]] = vals[i]
            while len(cache) > _VALUE_CACHE:
                cache.popitem(last=False)
        return vals[back]

    def func(*z):
        shape = np.shape(z[0])
        pts = np.stack([np.ravel(v) for v in z], axis=-1)
        if kind == "S":
            vals = boundary_cauchy(f, domain, j, pts, cfg)
        else:
            vals = solid(pts)
        return np.asarray(vals).reshape(shape)

    return FieldFunction(func, f.arity, f.deps | {j}, name=f"{kind}{j}[{f.name}]", costly=True)


def boundary_operator(f, domain, j, cfg=DEFAULT_CONFIG) -> FieldFunction:
    """S_j f as a lazily evaluated field function."""
    return _operator("S", f, domain, j, cfg)


def solid_operator(f, domain, j, cfg=DEFAULT_CONFIG, workers=None) -> FieldFunction:
    """T_j f as a lazily evaluated field function."""
    return _operator("T", f, domain, j, cfg, workers)


def apply_chain(f: FieldFunction, domain: ProductDomain, chain, cfg=DEFAULT_CONFIG,
                workers=None, literal: bool = False) -> FieldFunction:
    """Compose operators written left to right as in T_3 S_1 S_2 f.

    ``chain`` is a sequence of ``(tag, variable)`` pairs, e.g.
    ``[("T", 3), ("S", 1), ("S", 2)]``; the rightmost factor acts first.
    Factors in distinct variables commute, and so do their discretizations
    (the cells and nodes of one variable never depend on another), so unless
    ``literal`` is set the solid transforms are applied innermost, where the
    integrand is cheap, and the boundary sums outside.
    """
    chain = [tuple(c) for c in chain]
    variables = [v for _, v in chain]
    if len(set(variables)) != len(variables):
        raise ValueError("each factor must act on a distinct variable")
    if not literal:
        chain = [c for c in chain if c[0] == "S"] + [c for c in chain if c[0] == "T"]
    g = f
    for tag, var in reversed(chain):
        if tag not in ("S", "T"):
            raise ValueError(f"unknown operator tag {tag!r}")
        g = boundary_operator(g, domain, var, cfg) if tag == "S" else \
            solid_operator(g, domain, var, cfg, workers)
    return g


def compose_TS(f: FieldFunction, domain: ProductDomain, outer, inner, z,
               cfg: QuadratureConfig = DEFAULT_CONFIG, workers=None):
    """Outer operator applied to the inner one, e.g. outer=("T", 2), inner=("S", 1)."""
    g = apply_chain(f, domain, [tuple(outer), tuple(inner)], cfg, workers)
    pts, scalar = _as_points(z, domain.dim)
    vals = g.at(pts)
    return complex(vals[0]) if scalar else vals
