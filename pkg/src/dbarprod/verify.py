"""Residual checks for the operators and solutions.

Every check returns an ``IdentityReport`` holding the worst error on the
grid together with the few points where it is attained, so failures can be
located and re-run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cauchy import DEFAULT_CONFIG, QuadratureConfig, apply_chain, boundary_operator, solid_operator
from .fields import H_FD, FieldFunction, dbar, dz, multi_index
from .geometry import ProductDomain


@dataclass
class IdentityReport:
    name: str
    max_abs_error: float
    grid_size: int
    config_hash: str
    offenders: list = field(default_factory=list)  # (point, error), worst first
    scale: float = 1.0

    @property
    def relative_error(self) -> float:
        return self.max_abs_error / self.scale if self.scale > 0 else self.max_abs_error

    def passed(self, threshold: float, relative: bool = False) -> bool:
        err = self.relative_error if relative else self.max_abs_error
        return bool(err <= threshold)

    def to_dict(self) -> dict:
        enc = (lambda p: [[float(v.real), float(v.imag)] for v in p])
        return {"name": self.name, "max_abs_error": self.max_abs_error,
                "grid_size": self.grid_size, "config_hash": self.config_hash,
                "scale": self.scale,
                "offenders": [{"point": enc(p), "error": e} for p, e in self.offenders]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _report(name, grid, err, cfg, scale=1.0, top=5) -> IdentityReport:
    err = np.asarray(err, dtype=float)
    order = np.argsort(-err, kind="stable")[:top]
    offenders = [(np.asarray(grid[i]).copy(), float(err[i])) for i in order]
    return IdentityReport(name, float(err.max()) if err.size else 0.0, int(len(grid)),
                          cfg.digest() if cfg is not None else "", offenders, float(scale))


def _grid(grid):
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if len(grid) == 0:
        raise ValueError("empty grid")
    return grid


def dbar_residual(u: FieldFunction, form, domain: ProductDomain, grid, h_fd: float = H_FD,
                  cfg: QuadratureConfig = DEFAULT_CONFIG) -> IdentityReport:
    """max_j |dbar_j u - f_j| by central differences.

    ``form`` is a Form01 (u a function) or a Form02 (u the dzbar2 coefficient,
    checked against dbar_1 u = f).
    """
    grid = _grid(grid)
    comps = form.components
    if len(comps) == 1:
        err = np.abs(dbar(u, 1, h_fd).at(grid) - comps[0].at(grid))
        scale = np.max(np.abs(comps[0].at(grid)))
    else:
        err = np.zeros(len(grid))
        scale = 0.0
        for j, fj in enumerate(comps, start=1):
            fv = fj.at(grid)
            err = np.maximum(err, np.abs(dbar(u, j, h_fd).at(grid) - fv))
            scale = max(scale, float(np.max(np.abs(fv))))
    return _report(f"dbar-residual[{getattr(form, 'name', '')}]", grid, err, cfg, scale)


def pompeiu_check(f: FieldFunction, j: int, domain: ProductDomain, grid,
                  cfg: QuadratureConfig = DEFAULT_CONFIG, h_fd: float = H_FD,
                  workers=None) -> IdentityReport:
    """|S_j f + T_j dbar_j f - f|, using the analytic dbar_j f when supplied."""
    grid = _grid(grid)
    g = f.derivative(multi_index(domain.dim, (j, True)), h_fd)
    s = boundary_operator(f, domain, j, cfg).at(grid)
    t = solid_operator(g, domain, j, cfg, workers).at(grid)
    err = np.abs(s + t - f.at(grid))
    return _report(f"pompeiu[{j}:{f.name}]", grid, err, cfg, np.max(np.abs(f.at(grid))))


def holomorphy_check(g: FieldFunction, j: int, domain: ProductDomain, grid,
                     h_fd: float = H_FD, cfg: QuadratureConfig = DEFAULT_CONFIG) -> IdentityReport:
    """|dbar_j g| on the grid; S_j of anything should pass."""
    grid = _grid(grid)
    err = np.abs(dbar(g, j, h_fd).at(grid))
    return _report(f"holomorphy[{j}]", grid, err, cfg, np.max(np.abs(g.at(grid))))


def is_unit_speed(domain: ProductDomain, j: int, tol: float = 1e-8) -> bool:
    return all(np.max(np.abs(np.abs(c.derivative_nodes) - 1.0)) <= tol
               for c in domain.slice(j).curves)


def boundary_tangent(domain: ProductDomain, j: int):
    """Unit tangent of bD_j at (the closest boundary point to) each input."""
    slc = domain.slice(j)

    def tangent(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        flat = zeta.ravel()
        best = np.full(flat.size, np.inf)
        out = np.zeros(flat.size, dtype=complex)
        for c in slc.curves:
            dist, _, tan, _ = c.closest(flat)
            take = dist < best
            best[take] = dist[take]
            out[take] = tan[take] / np.abs(tan[take])
        return out.reshape(zeta.shape)

    return tangent


def prop31_identity(f: FieldFunction, domain: ProductDomain, grid,
                    cfg: QuadratureConfig = DEFAULT_CONFIG, h_fd: float = H_FD,
                    workers=None) -> IdentityReport:
    """|d_1 S_1 T_2 f - S_1 T_2 f~| with f~ = d_1 f + dbar_1 f conj(zeta_1')^2 on bD_1.

    bD_1 must be parametrized by arclength; the tangent factor is then the
    conjugate unit tangent squared.
    """
    if domain.dim != 2:
        raise ValueError("prop31_identity is stated on a product of two slices")
    if not is_unit_speed(domain, 1):
        raise ValueError("bD_1 must be parametrized by arclength (|zeta'| = 1)")
    grid = _grid(grid)
    d1 = f.derivative(multi_index(2, (1, False)), h_fd)
    db1 = f.derivative(multi_index(2, (1, True)), h_fd)
    tangent = boundary_tangent(domain, 1)

    # the tangent factor depends on z1 alone, so it is pulled through T2
    tau = FieldFunction(lambda z1, z2: np.conj(tangent(z1)) ** 2, 2, frozenset({1}))
    inner = solid_operator(d1, domain, 2, cfg, workers) + \
        tau * solid_operator(db1, domain, 2, cfg, workers)
    lhs_op = apply_chain(f, domain, [("S", 1), ("T", 2)], cfg, workers)
    lhs = dz(lhs_op, 1, h_fd).at(grid)
    rhs = boundary_operator(inner, domain, 1, cfg).at(grid)
    err = np.abs(lhs - rhs)
    return _report(f"s1t2-derivative[{f.name}]", grid, err, cfg, np.max(np.abs(rhs)))
