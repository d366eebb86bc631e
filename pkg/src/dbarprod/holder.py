"""Sampled Hoelder semi-norms, directional semi-norms and C^{k,alpha} norms.

All estimates here are suprema over finite pair sets, hence lower bounds of
the continuum quantities.  Pair sets mix all pairs of a coarse grid with
dyadic pairs z, z + 2^-m e anchored at hotspots, which is where the
interesting growth lives for boundary singularities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fields import FieldFunction, H_FD, all_indices
from .geometry import ProductDomain, contains

SCHEMES = ("grid-all-pairs", "dyadic-near-diagonal", "directional", "mixed")


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


@dataclass(frozen=True, eq=False)
class PairSet:
    """Point pairs ``(a[i], b[i])`` in a product domain, arrays of shape (P, dim)."""

    a: np.ndarray
    b: np.ndarray
    scheme: str = "mixed"

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=complex))
        b = np.atleast_2d(np.asarray(self.b, dtype=complex))
        if a.shape != b.shape:
            raise ValueError("pair arrays differ in shape")
        if self.scheme not in SCHEMES and not self.scheme.startswith("directional"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        same = np.all(a == b, axis=1)
        object.__setattr__(self, "a", a[~same])
        object.__setattr__(self, "b", b[~same])

    def __len__(self):
        return self.a.shape[0]

    def __or__(self, other: "PairSet") -> "PairSet":
        return PairSet(np.vstack([self.a, other.a]), np.vstack([self.b, other.b]), "mixed")

    def restrict(self, domain: ProductDomain, standoff: float = 0.0) -> "PairSet":
        """Drop pairs with a member outside the domain or within ``standoff`` of a boundary."""
        keep = _admissible(domain, self.a, standoff) & _admissible(domain, self.b, standoff)
        return PairSet(self.a[keep], self.b[keep], self.scheme)


def _admissible(domain, pts, standoff):
    ok = np.ones(len(pts), bool)
    for j, slc in enumerate(domain.slices):
        col = pts[:, j]
        uniq, inv = np.unique(col, return_inverse=True)
        good = contains(slc, uniq)
        if standoff > 0:
            good &= slc.boundary_distance(uniq) >= standoff
        ok &= good[inv.ravel()]
    return ok


def grid_pairs(points, limit: int = 400) -> PairSet:
    """All pairs of a grid (subsampled evenly to at most ``limit`` points)."""
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    if len(points) > limit:
        points = points[np.linspace(0, len(points) - 1, limit).round().astype(int)]
    i, j = np.triu_indices(len(points), k=1)
    return PairSet(points[i], points[j], "grid-all-pairs")


def dyadic_pairs(anchors, j: int, levels=range(1, 17), directions=(1.0,),
                 scale: float = 1.0) -> PairSet:
    """Pairs (p, p + scale 2^-m e) moving only variable ``j``, for each anchor p."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=complex))
    a, b = [], []
    for p in anchors:
        for m in levels:
            for e in directions:
                q = p.copy()
                q[j - 1] += scale * 2.0 ** (-m) * e
                a.append(p)
                b.append(q)
    return PairSet(np.array(a), np.array(b), "dyadic-near-diagonal")


def directional_pairs(fixed, moving, j: int) -> PairSet:
    """Pairs differing only in variable ``j``.

    ``fixed`` holds values of the other variables, shape (F, dim-1);
    ``moving`` holds pairs (zeta, zeta') in slice ``j``, shape (M, 2).
    """
    fixed = np.atleast_2d(np.asarray(fixed, dtype=complex))
    moving = np.atleast_2d(np.asarray(moving, dtype=complex))
    a, b = [], []
    for rest in fixed:
        for z0, z1 in moving:
            a.append(np.insert(rest, j - 1, z0))
            b.append(np.insert(rest, j - 1, z1))
    return PairSet(np.array(a), np.array(b), f"directional({j})")


def default_pairs(domain: ProductDomain, grid, hotspots=(), standoff: float = 0.0,
                  levels=range(1, 17)) -> PairSet:
    """Coarse grid all-pairs plus dyadic pairs at hotspots in every variable."""
    pairs = grid_pairs(grid)
    dirs = (1.0, -1.0, 1j, -1j)
    for j in range(1, domain.dim + 1):
        if len(hotspots):
            pairs = pairs | dyadic_pairs(hotspots, j, levels, dirs)
    return pairs.restrict(domain, standoff)


@dataclass
class HolderReport:
    alpha: float
    full_seminorm: float
    directional_seminorms: list
    argmax_pair: tuple
    pair_count: int
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        a, b = self.argmax_pair
        enc = (lambda p: [[float(v.real), float(v.imag)] for v in p])
        return {"alpha": self.alpha, "full": self.full_seminorm,
                "per_direction": list(self.directional_seminorms),
                "argmax_pair": [enc(a), enc(b)], "pair_count": self.pair_count}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _quotient(fa, fb, a, b, alpha):
    dist = np.linalg.norm(a - b, axis=-1)
    return np.abs(fa - fb) / dist**alpha


def holder_seminorm(f: FieldFunction, pairs: PairSet, alpha: float) -> HolderReport:
    """Sampled H^alpha[f] over ``pairs``, with the per-variable split of every pair.

    Each pair a -> b is also walked along the staircase that changes one
    variable at a time; the legs feed the directional estimates, so the
    reported values always satisfy full <= sum of directional.
    """
    _check_alpha(alpha)
    if len(pairs) == 0:
        raise ValueError("empty pair set")
    a, b = pairs.a, pairs.b
    fa, fb = f.at(a), f.at(b)
    q = _quotient(fa, fb, a, b, alpha)
    k = int(np.argmax(q))
    dim = a.shape[1]
    directional = []
    prev, fprev = a, fa
    steps = []
    for j in range(dim):
        nxt = prev.copy()
        nxt[:, j] = b[:, j]
        fnxt = fb if j == dim - 1 else f.at(nxt)
        moved = prev[:, j] != nxt[:, j]
        leg = np.zeros(len(a))
        if moved.any():
            leg[moved] = _quotient(fprev[moved], fnxt[moved], prev[moved], nxt[moved], alpha)
        steps.append(leg)
        prev, fprev = nxt, fnxt
    directional = [float(np.max(s)) for s in steps]
    return HolderReport(alpha, float(q[k]), directional, (a[k].copy(), b[k].copy()), len(pairs))


def directional_seminorm(f: FieldFunction, domain: ProductDomain, j: int, alpha: float,
                         fixed_grid, moving_pairs) -> float:
    """Sampled sup over ``fixed_grid`` of H_j^alpha[f] over ``moving_pairs``."""
    _check_alpha(alpha)
    if not 1 <= j <= domain.dim:
        raise ValueError(f"variable index {j} out of range")
    pairs = directional_pairs(fixed_grid, moving_pairs, j)
    if len(pairs) == 0:
        raise ValueError("empty pair set")
    q = _quotient(f.at(pairs.a), f.at(pairs.b), pairs.a, pairs.b, alpha)
    return float(np.max(q))


def ck_alpha_norm(f: FieldFunction, domain: ProductDomain, k: int, alpha: float, grid,
                  pairs: PairSet, h_fd: float = H_FD) -> float:
    """Sampled C^{k,alpha} norm: sum of sup|D^b f| for |b| <= k plus H^alpha of every
    order-k derivative.  Derivatives are Wirtinger derivatives in every variable."""
    _check_alpha(alpha)
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    dim = domain.dim
    top = all_indices(dim, k)
    if k > 2 and not all(f.has_derivative(b) for b in top):
        raise ValueError("k > 2 requires analytic derivatives of every order-k index")
    total = 0.0
    for order in range(k + 1):
        for beta in all_indices(dim, order):
            total += float(np.max(np.abs(f.derivative(beta, h_fd).at(grid))))
    for beta in top:
        total += holder_seminorm(f.derivative(beta, h_fd), pairs, alpha).full_seminorm
    return total


def form_norm(components, domain, k, alpha, grid, pairs, h_fd=H_FD) -> float:
    """C^{k,alpha} norm of a form: the sum over its coefficients."""
    return float(sum(ck_alpha_norm(c, domain, k, alpha, grid, pairs, h_fd) for c in components))
