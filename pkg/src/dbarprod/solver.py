"""Solution operators for the d-bar equation on product domains.

For a d-bar-closed (0,1) form f1 dzbar1 + f2 dzbar2 on D1 x D2 the solution is

    u = T1 f1 + T2 S1 f2,

for a (0,2) form f dzbar1 ^ dzbar2 the (0,1) form (T1 f) dzbar2 solves it, and
on a product of three slices the corresponding sum T1 f1 + T2 S1 f2 + T3 S1 S2 f3
is available for experiments.  Forms of bidegree (p, q) with p > 0 are solved
coefficient by coefficient with the same operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cauchy import DEFAULT_CONFIG, QuadratureConfig, apply_chain, solid_operator
from .fields import H_FD, FieldFunction, constant, dbar
from .geometry import ProductDomain, product_grid

CLOSED_TOL = 1e-3


class ClosednessError(ValueError):
    """The (0,1) datum is not d-bar-closed to the finite-difference tolerance."""


@dataclass(frozen=True, eq=False)
class Form01:
    """f1 dzbar1 + f2 dzbar2 with declared regularity C^{k, alpha}.

    ``singular`` lists points ``(variable, value)`` around which the
    closedness check is skipped within ``exclusion`` (data that are only
    Hoelder there, closed in the sense of distributions).
    """

    f1: FieldFunction
    f2: FieldFunction
    k: int = 0
    alpha: float = 0.5
    name: str = ""
    singular: tuple = ()
    exclusion: float = 0.05
    potential: object = None  # a known primitive g with dbar g = f, if any

    @property
    def components(self):
        return (self.f1, self.f2)

    def scaled(self, c: complex) -> "Form01":
        return Form01(self.f1 * c, self.f2 * c, self.k, self.alpha, f"{c}*{self.name}",
                      self.singular, self.exclusion,
                      None if self.potential is None else self.potential * c)


@dataclass(frozen=True, eq=False)
class Form02:
    """f dzbar1 ^ dzbar2 (top degree, automatically closed)."""

    f: FieldFunction
    name: str = ""

    @property
    def components(self):
        return (self.f,)


@dataclass(frozen=True, eq=False)
class Form01Tri:
    """f1 dzbar1 + f2 dzbar2 + f3 dzbar3 on a product of three slices."""

    f1: FieldFunction
    f2: FieldFunction
    f3: FieldFunction
    name: str = ""

    @property
    def components(self):
        return (self.f1, self.f2, self.f3)


def _exclude(form: Form01, grid: np.ndarray) -> np.ndarray:
    keep = np.ones(len(grid), bool)
    for var, value in form.singular:
        keep &= np.abs(grid[:, var - 1] - value) > form.exclusion
    return grid[keep]


def check_closed(form: Form01, domain: ProductDomain, grid, h_fd: float = H_FD) -> float:
    """Max over ``grid`` of |dbar_2 f1 - dbar_1 f2| by central differences."""
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if len(grid) == 0:
        raise ValueError("empty grid")
    r = dbar(form.f1, 2, h_fd).at(grid) - dbar(form.f2, 1, h_fd).at(grid)
    return float(np.max(np.abs(r)))


def default_check_grid(domain: ProductDomain) -> np.ndarray:
    return product_grid(domain, 0.25, 0.1)


def validate_closed(form: Form01, domain: ProductDomain, grid=None,
                    tol: float = CLOSED_TOL) -> float:
    grid = default_check_grid(domain) if grid is None else np.atleast_2d(grid)
    grid = _exclude(form, grid)
    res = check_closed(form, domain, grid)
    if res > tol:
        raise ClosednessError(
            f"form {form.name or '?'} is not d-bar-closed: residual {res:.3e} > {tol:.1e}")
    return res


def solution_01(form: Form01, domain: ProductDomain, cfg: QuadratureConfig = DEFAULT_CONFIG,
                workers=None, check_grid=None, check: bool = True) -> FieldFunction:
    """u = T1 f1 + T2 S1 f2 as a point evaluator, after checking closedness."""
    if domain.dim != 2:
        raise ValueError("solution_01 needs a product of two slices")
    if check:
        validate_closed(form, domain, check_grid)
    t1 = solid_operator(form.f1, domain, 1, cfg, workers)
    t2s1 = apply_chain(form.f2, domain, [("T", 2), ("S", 1)], cfg, workers)
    u = t1 + t2s1
    return FieldFunction(u.func, 2, u.deps, name=f"T[{form.name}]", costly=True)


def solve_01(form: Form01, domain: ProductDomain, z, cfg: QuadratureConfig = DEFAULT_CONFIG,
             workers=None):
    u = solution_01(form, domain, cfg, workers)
    arr = np.asarray(z, dtype=complex)
    return complex(u(*arr)) if arr.ndim == 1 else u.at(arr)


def solution_02(form: Form02, domain: ProductDomain, cfg: QuadratureConfig = DEFAULT_CONFIG,
                workers=None) -> FieldFunction:
    """Coefficient of dzbar2 in the solution (T1 f) dzbar2."""
    return solid_operator(form.f, domain, 1, cfg, workers)


def solve_02(form: Form02, domain: ProductDomain, z, cfg: QuadratureConfig = DEFAULT_CONFIG,
             workers=None):
    u = solution_02(form, domain, cfg, workers)
    arr = np.asarray(z, dtype=complex)
    return complex(u(*arr)) if arr.ndim == 1 else u.at(arr)


def solution_01_tridisc(f1, f2, f3, domain: ProductDomain,
                        cfg: QuadratureConfig = DEFAULT_CONFIG, workers=None) -> FieldFunction:
    """T1 f1 + T2 S1 f2 + T3 S1 S2 f3 on a product of three slices."""
    if domain.dim != 3:
        raise ValueError("solution_01_tridisc needs a product of three slices")
    terms = [solid_operator(f1, domain, 1, cfg, workers),
             apply_chain(f2, domain, [("T", 2), ("S", 1)], cfg, workers),
             apply_chain(f3, domain, [("T", 3), ("S", 1), ("S", 2)], cfg, workers)]
    u = terms[0] + terms[1] + terms[2]
    return FieldFunction(u.func, 3, u.deps, name="T3[f]", costly=True)


def solve_01_tridisc(f1, f2, f3, domain: ProductDomain, z,
                     cfg: QuadratureConfig = DEFAULT_CONFIG, workers=None):
    u = solution_01_tridisc(f1, f2, f3, domain, cfg, workers)
    arr = np.asarray(z, dtype=complex)
    return complex(u(*arr)) if arr.ndim == 1 else u.at(arr)


def solve_pq(coefficients: dict, domain: ProductDomain, cfg: QuadratureConfig = DEFAULT_CONFIG,
             workers=None) -> dict:
    """Solve a (p, 1) form given as {dz-multi-index label: Form01} coefficient-wise."""
    return {label: solution_01(form, domain, cfg, workers) for label, form in coefficients.items()}


# ---------------------------------------------------------------------------
# named data


def polyconj() -> Form01:
    """dbar(zbar1 zbar2): f1 = zbar2, f2 = zbar1; the solution is zbar1 zbar2."""
    f1 = FieldFunction(lambda z1, z2: np.conj(z2), deps=frozenset({2}), name="zbar2")
    f2 = FieldFunction(lambda z1, z2: np.conj(z1), deps=frozenset({1}), name="zbar1")
    u = FieldFunction(lambda z1, z2: np.conj(z1 * z2), name="zbar1zbar2")
    return Form01(f1, f2, k=1, alpha=0.5, name="polyconj", potential=u)


def gauss_bump(center=(0.1 + 0.1j, -0.2 + 0.0j), width: float = 0.5) -> Form01:
    """dbar of g = exp(-(|z1-c1|^2 + |z2-c2|^2) / width^2)."""
    c1, c2 = center
    s2 = width**2

    def sq(w):
        return w.real * w.real + w.imag * w.imag

    def g(z1, z2):
        return np.exp(-(sq(z1 - c1) + sq(z2 - c2)) / s2)

    f1 = FieldFunction(lambda z1, z2: -(z1 - c1) / s2 * g(z1, z2), name="bump1")
    f2 = FieldFunction(lambda z1, z2: -(z2 - c2) / s2 * g(z1, z2), name="bump2")
    return Form01(f1, f2, k=2, alpha=0.5, name="gauss-bump", potential=FieldFunction(g, name="bump"))


def holder_cone(alpha: float = 0.5, apex: complex = 0.3 + 0.0j) -> Form01:
    """dbar(|z1 - p|^(1+alpha) zbar2): a C^{0,alpha} datum with a cone point at p."""
    e = 1.0 + alpha

    def r(z1):
        return np.abs(z1 - apex)

    def f1(z1, z2):
        # dbar |w|^e = (e/2) |w|^(e-2) w, which vanishes at the apex
        rr = np.where(r(z1) > 0, r(z1), 1.0)
        return 0.5 * e * rr ** (e - 2) * (z1 - apex) * np.conj(z2)

    f1 = FieldFunction(f1, name="cone1")
    f2 = FieldFunction(lambda z1, z2: r(z1) ** e + 0 * z2, deps=frozenset({1}), name="cone2")
    return Form01(f1, f2, k=0, alpha=alpha, name="holder-cone", singular=((1, apex),))


def mixed_poly() -> Form01:
    """dbar(zbar1^2 z2 + z1 zbar2): f1 = 2 zbar1 z2, f2 = z1."""
    f1 = FieldFunction(lambda z1, z2: 2 * np.conj(z1) * z2, name="2zbar1z2")
    f2 = FieldFunction(lambda z1, z2: z1 + 0 * z2, deps=frozenset({1}), name="z1")
    return Form01(f1, f2, k=1, alpha=0.5, name="mixed-poly")


def _kerzman(k: int = 0, alpha: float = 0.5):
    from .experiments import KerzmanDatum, kerzman_form

    return kerzman_form(KerzmanDatum(k, alpha))


def _tumanov(alpha: float = 0.5):
    from .experiments import TumanovDatum, tumanov_form

    return tumanov_form(TumanovDatum(alpha))


@dataclass(frozen=True)
class FormEntry:
    factory: Callable
    degree: int = 1
    dim: int = 2
    doc: str = ""


FORMS = {
    "polyconj": FormEntry(polyconj, doc="dbar(zbar1 zbar2)"),
    "kerzman": FormEntry(_kerzman, doc="dbar((z1-1)^(k+alpha) zbar2), params k, alpha"),
    "gauss-bump": FormEntry(gauss_bump, doc="dbar of a Gaussian bump"),
    "holder-cone": FormEntry(holder_cone, doc="dbar(|z1-p|^(1+alpha) zbar2), param alpha"),
    "mixed-poly": FormEntry(mixed_poly, doc="dbar(zbar1^2 z2 + z1 zbar2)"),
    "tridisc-tumanov": FormEntry(_tumanov, dim=3, doc="(0, h(z1,z3), 0) on the tridisc"),
    "const02": FormEntry(lambda: Form02(constant(1.0), "const02"), degree=2,
                         doc="dzbar1 ^ dzbar2"),
    "conj02": FormEntry(lambda: Form02(FieldFunction(lambda z1, z2: np.conj(z1) + 0 * z2,
                                                     deps=frozenset({1})), "conj02"),
                        degree=2, doc="zbar1 dzbar1 ^ dzbar2"),
}


def get_form(name: str, **params):
    if name not in FORMS:
        raise KeyError(f"unknown form {name!r}; known: {', '.join(sorted(FORMS))}")
    return FORMS[name].factory(**params)
