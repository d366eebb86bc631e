"""Planar slices, their boundary curves, and product domains.

Boundary curves are stored as equispaced samples of a smooth periodic
parametrization together with the derivative samples.  Everything in
between is the trigonometric interpolant of the samples, so all geometric
quantities (arclength, tangents, closest points) are spectrally accurate for
smooth curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from shapely.geometry import LinearRing

TWO_PI = 2.0 * np.pi

# points closer than this to the boundary are never "inside"
BOUNDARY_COLLAR = 1e-12


class GeometryError(ValueError):
    """Invalid curve or domain data."""


class EmptyGridError(GeometryError):
    """No lattice point survives the containment and standoff filters."""


def _trig_eval(coef: np.ndarray, omega: float, t, orders=(0,)) -> list:
    """Evaluate the trigonometric interpolant with FFT coefficients ``coef``
    and its parameter derivatives of the requested orders.

    The Nyquist mode is split symmetrically so that the interpolant of real
    data is real and passes through the samples.
    """
    n = coef.size
    half = n // 2
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    kpos = np.arange(half)
    cpos = coef[:half]
    cneg = np.concatenate([[0.0], coef[half + 1:][::-1]])  # mode -k at index k
    nyq = coef[half]
    w = half * omega
    outs = [np.empty(flat.size, dtype=complex) for _ in orders]
    chunk = max(1, 4_000_000 // n)
    for s in range(0, flat.size, chunk):
        tt = flat[s:s + chunk]
        step = np.exp(1j * omega * tt)
        phase = np.empty((tt.size, half), dtype=complex)
        phase[:, 0] = 1.0
        if half > 1:
            phase[:, 1:] = step[:, None]
            np.cumprod(phase[:, 1:], axis=1, out=phase[:, 1:])
        for out, m in zip(outs, orders):
            fac = (1j * kpos * omega) ** m
            val = phase @ (cpos * fac) + np.conj(phase) @ (cneg * np.conj(fac))
            # d^m/dt^m cos(w t) = w^m cos(w t + m pi/2)
            out[s:s + chunk] = val + nyq * w**m * np.cos(w * tt + m * np.pi / 2)
    return [o.reshape(t.shape) for o in outs]


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """One closed Jordan curve sampled at equispaced parameter values.

    ``derivative_nodes`` holds d(zeta)/d(tau) where tau runs over
    ``[0, period)``.  Ordinary curves use ``period = 2*pi``; arclength
    parametrized curves use ``period = closed_length`` so that their
    derivative has unit modulus.
    """

    nodes: np.ndarray
    derivative_nodes: np.ndarray
    period: float = TWO_PI
    generator: Optional[Callable[[np.ndarray], tuple]] = field(default=None, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=complex)
        deriv = np.asarray(self.derivative_nodes, dtype=complex)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "derivative_nodes", deriv)
        n = nodes.size
        if n < 16 or n % 2:
            raise GeometryError(f"node count must be even and >= 16, got {n}")
        if deriv.shape != nodes.shape:
            raise GeometryError("derivative_nodes must match nodes")
        if not np.all(np.isfinite(nodes)) or not np.all(np.isfinite(deriv)):
            raise GeometryError("non-finite curve samples")
        if not LinearRing(np.column_stack([nodes.real, nodes.imag])).is_simple:
            raise GeometryError("curve self-intersects at sample resolution")

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def params(self) -> np.ndarray:
        return self.period * np.arange(self.n) / self.n

    @property
    def omega(self) -> float:
        return TWO_PI / self.period

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.fft.fft(self.nodes) / self.n

    @cached_property
    def closed_length(self) -> float:
        return float(self.period / self.n * np.sum(np.abs(self.derivative_nodes)))

    @cached_property
    def signed_area(self) -> float:
        dt = self.period / self.n
        return float(0.5 * dt * np.sum((np.conj(self.nodes) * self.derivative_nodes).imag))

    @property
    def orientation(self) -> str:
        return "positive" if self.signed_area > 0 else "negative"

    def evaluate(self, t, order: int = 0) -> np.ndarray:
        """Position (order 0) or parameter derivatives of the interpolant."""
        return _trig_eval(self.coefficients, self.omega, t, (order,))[0]

    def evaluate_jet(self, t, orders=(0, 1, 2)) -> list:
        return _trig_eval(self.coefficients, self.omega, t, orders)

    def spectral_derivative(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        k[self.n // 2] = 0.0
        return np.fft.ifft(np.fft.fft(self.nodes) * 1j * k * self.omega)

    def resample(self, n: int) -> "BoundaryCurve":
        """Same curve sampled at ``n`` equispaced parameters."""
        if n == self.n:
            return self
        t = self.period * np.arange(n) / n
        if self.generator is not None:
            z, dz = self.generator(t)
        else:
            z, dz = self.evaluate(t), self.evaluate(t, 1)
        return BoundaryCurve(z, dz, self.period, self.generator)

    def reversed(self) -> "BoundaryCurve":
        t = self.params
        z = self.evaluate(-t)
        dz = -self.evaluate(-t, 1)
        return BoundaryCurve(z, dz, self.period)

    @cached_property
    def _fine(self):
        m = max(8 * self.n, 8192)
        t = self.period * np.arange(m) / m
        z, dz = self.evaluate_jet(t, (0, 1))
        return t, z, dz, cKDTree(np.column_stack([z.real, z.imag]))

    def closest(self, z, refine_within: float = 1e-3):
        """Distance from each ``z`` to the curve, closest parameter and unit tangent.

        The nearest fine sample is polished by Newton's method for points
        within ``refine_within`` of the curve; further away the fine sample
        is already accurate enough for every use in this package.
        """
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        t_fine, z_fine, dz_fine, tree = self._fine
        dist, idx = tree.query(np.column_stack([flat.real, flat.imag]))
        t = t_fine[idx]
        tangent = dz_fine[idx]
        near = np.flatnonzero(dist < refine_within)
        if near.size:
            zn = flat[near]
            tn = t[near]
            step_cap = self.period / t_fine.size
            for _ in range(4):
                p, dp, ddp = self.evaluate_jet(tn)
                g = (np.conj(p - zn) * dp).real
                h = np.abs(dp) ** 2 + (np.conj(p - zn) * ddp).real
                ok = h > 0
                dt = np.where(ok, -g / np.where(ok, h, 1.0), 0.0)
                tn = tn + np.clip(dt, -step_cap, step_cap)
            p, dp = self.evaluate_jet(tn, (0, 1))
            t[near] = tn
            dist[near] = np.abs(p - zn)
            tangent[near] = dp
            foot = z_fine[idx]
            foot[near] = p
        else:
            foot = z_fine[idx]
        shape = z.shape
        return (dist.reshape(shape), np.mod(t, self.period).reshape(shape),
                tangent.reshape(shape), foot.reshape(shape))


def curve_from_function(func: Callable, dfunc: Callable, n: int = 512) -> BoundaryCurve:
    """Sample an analytically given 2*pi-periodic curve and its derivative."""

    def gen(t):
        return np.asarray(func(t), dtype=complex), np.asarray(dfunc(t), dtype=complex)

    t = TWO_PI * np.arange(n) / n
    z, dz = gen(t)
    curve = BoundaryCurve(z, dz, TWO_PI, gen)
    spec = curve.spectral_derivative()
    err = np.max(np.abs(spec - dz)) / np.max(np.abs(dz))
    if err > 1e-8:
        raise GeometryError(
            f"derivative samples inconsistent with nodes (rel err {err:.2e}); "
            "increase n or check the derivative")
    return curve


def curve_from_nodes(nodes: Sequence[complex]) -> BoundaryCurve:
    """Curve from raw equispaced samples; derivative taken spectrally."""
    nodes = np.asarray(nodes, dtype=complex)
    n = nodes.size
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    dz = np.fft.ifft(np.fft.fft(nodes) * 1j * k)
    return BoundaryCurve(nodes, dz)


def circle(center: complex = 0.0, radius: float = 1.0, n: int = 512) -> BoundaryCurve:
    return curve_from_function(lambda t: center + radius * np.exp(1j * t),
                               lambda t: 1j * radius * np.exp(1j * t), n)


def ellipse(a: float = 2.0, b: float = 1.0, center: complex = 0.0, n: int = 512) -> BoundaryCurve:
    return curve_from_function(lambda t: center + a * np.cos(t) + 1j * b * np.sin(t),
                               lambda t: -a * np.sin(t) + 1j * b * np.cos(t), n)


def smoothed_square(half_width: float = 1.0, power: int = 2, center: complex = 0.0,
                    n: int = 512) -> BoundaryCurve:
    """The analytic curve |x|^(2p) + |y|^(2p) = w^(2p), a square with rounded corners."""
    p2 = 2 * power

    def radius(t):
        c, s = np.cos(t), np.sin(t)
        q = c**p2 + s**p2
        r = half_width * q ** (-1.0 / p2)
        dq = p2 * (-c ** (p2 - 1) * s + s ** (p2 - 1) * c)
        return r, -r * dq / (p2 * q)

    def func(t):
        r, _ = radius(t)
        return center + r * np.exp(1j * t)

    def dfunc(t):
        r, dr = radius(t)
        return (dr + 1j * r) * np.exp(1j * t)

    return curve_from_function(func, dfunc, n)


def curve_point(curve: BoundaryCurve, t: float) -> complex:
    """Position on ``curve`` at parameter ``t`` (reduced modulo the period)."""
    t = float(t) % curve.period
    pos = t * curve.n / curve.period
    k = round(pos)
    if abs(pos - k) < 1e-12:
        return complex(curve.nodes[k % curve.n])
    return complex(curve.evaluate(np.array([t]))[0])


def arclength_reparametrize(curve: BoundaryCurve) -> BoundaryCurve:
    """Unit-speed resampling of ``curve`` with the same orientation and length."""
    n = curve.n
    speed = np.abs(curve.derivative_nodes)
    if np.min(speed) < 1e-12:
        raise GeometryError("degenerate parametrization: vanishing derivative")
    length = curve.closed_length
    # s(t) = length * t / period + periodic part, integrated spectrally
    sh = np.fft.fft(speed) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0
    omega = curve.omega
    with np.errstate(divide="ignore", invalid="ignore"):
        ih = np.where(k != 0, sh / (1j * k * omega), 0.0)
    ih[n // 2] = 0.0

    def s_of(t):
        phase = np.exp(1j * np.outer(t, k * omega))
        return sh[0].real * t + (phase @ ih).real

    s0 = s_of(np.zeros(1))[0]
    targets = length * np.arange(n) / n
    t = curve.period * np.arange(n) / n
    for _ in range(30):
        resid = s_of(t) - s0 - targets
        t = t - resid / np.abs(curve.evaluate(t, 1))
        if np.max(np.abs(resid)) < 1e-14 * length:
            break
    z = curve.evaluate(t)
    dz = curve.evaluate(t, 1)
    dz = dz / np.abs(dz)
    return BoundaryCurve(z, dz, period=length)


@dataclass(frozen=True, eq=False)
class PlanarDomain:
    """Bounded planar domain: one outer curve and optional hole curves.

    Curves are reoriented on construction so that the domain lies to the left
    of every curve (outer counterclockwise, holes clockwise).
    """

    curves: tuple

    def __post_init__(self):
        curves = list(self.curves)
        if not curves:
            raise GeometryError("a domain needs at least one boundary curve")
        fixed = []
        for i, c in enumerate(curves):
            want = "positive" if i == 0 else "negative"
            fixed.append(c if c.orientation == want else c.reversed())
        object.__setattr__(self, "curves", tuple(fixed))
        outer = PlanarDomain.__new__(PlanarDomain)
        object.__setattr__(outer, "curves", (fixed[0],))
        for hole in fixed[1:]:
            if not np.all(contains(outer, hole.nodes)):
                raise GeometryError("hole curve not strictly inside the outer curve")

    @property
    def outer(self) -> BoundaryCurve:
        return self.curves[0]

    @cached_property
    def bounding_box(self) -> tuple:
        z = self.outer.evaluate(np.linspace(0, self.outer.period, 8 * self.outer.n, endpoint=False))
        return (float(z.real.min()), float(z.real.max()), float(z.imag.min()), float(z.imag.max()))

    @property
    def diameter(self) -> float:
        x0, x1, y0, y1 = self.bounding_box
        return float(np.hypot(x1 - x0, y1 - y0))

    @property
    def area(self) -> float:
        return float(sum(c.signed_area for c in self.curves))

    @property
    def perimeter(self) -> float:
        return float(sum(c.closed_length for c in self.curves))

    def max_node_spacing(self, n: Optional[int] = None) -> float:
        """Largest arclength gap between consecutive boundary nodes."""
        out = 0.0
        for c in self.curves:
            c = c.resample(n) if n else c
            out = max(out, float(np.max(np.abs(c.derivative_nodes)) * c.period / c.n))
        return out

    def quadrature_nodes(self, n: int) -> tuple:
        """Trapezoid nodes and complex weights d(zeta) for all curves at ``n`` nodes each."""
        zs, ws = [], []
        for c in self.curves:
            r = c.resample(n)
            zs.append(r.nodes)
            ws.append(r.derivative_nodes * (r.period / r.n))
        return np.concatenate(zs), np.concatenate(ws)

    def boundary_distance(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.min([c.closest(z)[0] for c in self.curves], axis=0)

    def replace_curve(self, i: int, curve: BoundaryCurve) -> "PlanarDomain":
        curves = list(self.curves)
        curves[i] = curve
        return PlanarDomain(tuple(curves))


def disc(center: complex = 0.0, radius: float = 1.0, n: int = 512) -> PlanarDomain:
    return PlanarDomain((circle(center, radius, n),))


def annulus(inner: float = 0.5, outer: float = 1.0, n: int = 512) -> PlanarDomain:
    return PlanarDomain((circle(0.0, outer, n), circle(0.0, inner, n)))


def winding_number(domain: PlanarDomain, z, n: Optional[int] = None) -> np.ndarray:
    """Winding number of the oriented boundary about ``z`` (trapezoid rule).

    Accurate for points a few node spacings away from the boundary.
    """
    z = np.asarray(z, dtype=complex)
    nodes, w = domain.quadrature_nodes(n or domain.outer.n)
    flat = z.ravel()
    out = np.empty(flat.size)
    chunk = max(1, 2_000_000 // nodes.size)
    for s in range(0, flat.size, chunk):
        zz = flat[s:s + chunk, None]
        out[s:s + chunk] = (np.sum(w / (nodes - zz), axis=1) / (2j * np.pi)).real
    return out.reshape(z.shape)


def contains(domain: PlanarDomain, z):
    """Whether ``z`` lies in the domain (winding number one).

    Evaluated through the closest boundary point: the domain lies to the left
    of every oriented curve, so ``z`` is inside iff it sits on the left of the
    tangent at its closest boundary point.  This agrees with the winding
    number everywhere off the boundary and stays exact arbitrarily close to
    it.  Points within ``BOUNDARY_COLLAR`` of the boundary are outside.
    """
    arr = np.asarray(z, dtype=complex)
    flat = arr.ravel()
    best = np.full(flat.size, np.inf)
    side = np.zeros(flat.size)
    for c in domain.curves:
        d, _, tangent, foot = c.closest(flat)
        s = (np.conj(tangent) * (flat - foot)).imag
        closer = d < best
        best = np.where(closer, d, best)
        side = np.where(closer, s, side)
    inside = (side > 0) & (best > BOUNDARY_COLLAR)
    if arr.ndim == 0:
        return bool(inside[0])
    return inside.reshape(arr.shape)


def interior_grid(domain: PlanarDomain, spacing: float, standoff: float) -> np.ndarray:
    """Lattice points (pitch ``spacing``, anchored at the origin) inside the domain
    and at least ``standoff`` from every boundary node, ordered row by row."""
    if spacing <= 0 or standoff <= 0:
        raise ValueError("spacing and standoff must be positive")
    x0, x1, y0, y1 = domain.bounding_box
    xs = spacing * np.arange(np.ceil(x0 / spacing), np.floor(x1 / spacing) + 1)
    ys = spacing * np.arange(np.ceil(y0 / spacing), np.floor(y1 / spacing) + 1)
    X, Y = np.meshgrid(xs, ys)
    pts = (X + 1j * Y).ravel()
    pts = pts[contains(domain, pts)]
    nodes = np.concatenate([c.nodes for c in domain.curves])
    if pts.size:
        tree = cKDTree(np.column_stack([nodes.real, nodes.imag]))
        d, _ = tree.query(np.column_stack([pts.real, pts.imag]))
        pts = pts[d >= standoff]
    if pts.size == 0:
        raise EmptyGridError(
            f"no interior lattice point with spacing {spacing} keeps standoff {standoff}")
    return pts


@dataclass(frozen=True, eq=False)
class ProductDomain:
    """Ordered product of planar slices, D_1 x D_2 (x D_3)."""

    slices: tuple

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))
        if len(self.slices) not in (2, 3):
            raise GeometryError("product domains have 2 or 3 slices")

    @property
    def dim(self) -> int:
        return len(self.slices)

    def slice(self, j: int) -> PlanarDomain:
        """Slice of the one-based variable index ``j``."""
        if not 1 <= j <= self.dim:
            raise ValueError(f"variable index {j} out of range for {self.dim} slices")
        return self.slices[j - 1]

    def contains(self, point) -> bool:
        return all(contains(s, p) for s, p in zip(self.slices, point))


def polydisc(n: int = 2, nodes: int = 512) -> ProductDomain:
    return ProductDomain(tuple(disc(n=nodes) for _ in range(n)))


def product_grid(domain: ProductDomain, spacing, standoff) -> np.ndarray:
    """Cartesian product of the slice grids, shape (points, dim), row-major."""
    if np.isscalar(spacing):
        spacing = [spacing] * domain.dim
    if np.isscalar(standoff):
        standoff = [standoff] * domain.dim
    grids = [interior_grid(s, h, d) for s, h, d in zip(domain.slices, spacing, standoff)]
    mesh = np.meshgrid(*grids, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])
