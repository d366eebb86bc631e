"""Desk-scale reproductions of the two counterexamples and norm-ratio studies.

Kerzman datum: f = dbar((z1 - 1)^(k+alpha) zbar2) on the bidisc, with the
branch arg(z1 - 1) in (pi/2, 3pi/2).  The solution's derivatives D^k u are
only alpha-Hoelder at z1 = 1; directional quotients at a larger exponent
alpha' grow like 2^{m (alpha' - alpha)} along dyadic pairs approaching 1.

Tumanov datum: a piecewise function h~ on b(disc) x disc, extended inside by
an inf-convolution, used as f2 = h(z1, z3) on the tridisc.  The scan measures
the z3 Hoelder quotient of S1 h at z1 = 1 - eps.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .cauchy import DEFAULT_CONFIG, QuadratureConfig, boundary_operator
from .fields import FieldFunction, all_indices, constant, multi_index
from .geometry import ProductDomain, polydisc, product_grid
from .holder import dyadic_pairs, form_norm, grid_pairs, holder_seminorm
from .solver import Form01, Form01Tri, solution_01, solution_01_tridisc

KERZMAN_MIN_RATIO = 1.15
KERZMAN_ALPHA_SPREAD = 2.0
TUMANOV_MIN_RATIO = 1.2
FACTORIZATION_TOL = 1e-6
REFINEMENT_DRIFT = 2.0


@dataclass
class TrendReport:
    """One scan: parameter values, measured sequences, verdicts and growth ratios.

    ``verdicts`` decide ``passed``; ``diagnostics`` are recorded alongside
    but do not enter the pass/fail decision.
    """

    name: str
    parameter: str
    values: list
    quantities: dict
    verdicts: dict
    ratios: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        d = np.diff(v)
        if v.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("scan parameter values must be strictly monotone")

    @property
    def passed(self) -> bool:
        return all(bool(x) for x in self.verdicts.values())

    def to_dict(self) -> dict:
        clean = (lambda xs: [None if not np.isfinite(x) else float(x) for x in xs])
        return {"name": self.name, "parameter": self.parameter,
                "values": [float(x) for x in self.values],
                "quantities": {k: clean(v) for k, v in self.quantities.items()},
                "ratios": {k: clean(v) for k, v in self.ratios.items()},
                "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
                "diagnostics": self.diagnostics, "meta": self.meta, "passed": self.passed}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = list(self.quantities)
        w.writerow([self.parameter] + keys)
        for i, v in enumerate(self.values):
            w.writerow([repr(float(v))] + [repr(float(self.quantities[k][i])) for k in keys])
        return buf.getvalue()


def growth_ratios(seq) -> list:
    seq = np.asarray(seq, dtype=float)
    return list(seq[1:] / seq[:-1])


def strictly_increasing(seq) -> bool:
    return bool(np.all(np.diff(np.asarray(seq, dtype=float)) > 0))


def nodes_for_distance(distance: float, cfg: QuadratureConfig, oversample: float = 1.0) -> int:
    """Smallest power of two keeping ``distance`` outside the standoff collar,
    times ``oversample``, and never below the configured node count."""
    need = oversample * cfg.standoff_factor * 2 * np.pi / distance
    n = 2 ** int(np.ceil(np.log2(need)))
    return max(cfg.boundary_nodes, n)


# ---------------------------------------------------------------------------
# Kerzman datum


def _branch_power(w, p):
    """w^p with arg w taken in [0, 2 pi), so the cut lies along w > 0."""
    w = np.asarray(w, dtype=complex)
    r = np.abs(w)
    arg = np.mod(np.angle(w), 2 * np.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, r**p * np.exp(1j * p * arg), 0.0)
    return out


@dataclass(frozen=True)
class KerzmanDatum:
    k: int = 0
    alpha: float = 0.5

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValueError("k must be a nonnegative integer")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def exponent(self) -> float:
        return self.k + self.alpha

    def f2_derivative(self, r: int):
        """d^r/dz1^r of (z1 - 1)^(k+alpha) as an evaluator of (z1, z2)."""
        p = self.exponent
        c = float(np.prod([p - i for i in range(r)])) if r else 1.0
        return lambda z1, z2: c * _branch_power(z1 - 1.0, p - r) + 0 * z2


def kerzman_form(datum: KerzmanDatum) -> Form01:
    """f1 = 0, f2 = (z1 - 1)^(k+alpha), with analytic derivatives up to order k."""
    zero = (lambda z1, z2: np.zeros(np.broadcast(z1, z2).shape, complex))
    derivs = {}
    for order in range(1, datum.k + 1):
        for idx in all_indices(2, order):
            if idx[0] == order:
                derivs[idx] = datum.f2_derivative(order)
            else:
                derivs[idx] = zero
    f2 = FieldFunction(datum.f2_derivative(0), 2, frozenset({1}), derivs, order=datum.k,
                       name=f"(z1-1)^{datum.exponent:g}")
    p = datum.exponent
    u = FieldFunction(lambda z1, z2: np.conj(z2) * _branch_power(z1 - 1.0, p),
                      name="kerzman-potential")
    return Form01(constant(0.0), f2, datum.k, datum.alpha, f"kerzman(k={datum.k},alpha={datum.alpha:g})",
                  singular=((1, 1.0 + 0j),), potential=u)


def kerzman_scan(datum: KerzmanDatum, alpha_prime: float, levels=range(3, 9),
                 cfg: QuadratureConfig = DEFAULT_CONFIG, z2: complex = 0.5,
                 oversample: float = 4.0, workers=None) -> TrendReport:
    """Directional quotients of D^k u = d1^k u over the pairs (1 - 2^-m, 1 - 2^-m-1).

    The boundary node count is raised so that the innermost pair member
    keeps the standoff (with ``oversample`` extra resolution, since the
    datum is only Hoelder at z1 = 1).
    """
    if not datum.alpha <= alpha_prime < 1:
        raise ValueError("need alpha <= alpha' < 1")
    levels = list(levels)
    if not levels:
        raise ValueError("empty level range")
    closest = 2.0 ** (-max(levels) - 1)
    cfg = replace(cfg, boundary_nodes=nodes_for_distance(closest, cfg, oversample))
    form = kerzman_form(datum)
    u = solution_01(form, polydisc(), cfg, workers)
    idx = multi_index(2, *[(1, False)] * datum.k)
    du = u.derivative(idx)
    exact = form.potential.derivative(idx) if datum.k == 0 else FieldFunction(
        lambda z1, z2: np.conj(z2) * datum.f2_derivative(datum.k)(z1, z2))
    a = np.array([[1 - 2.0**-m, z2] for m in levels], dtype=complex)
    b = np.array([[1 - 2.0 ** (-m - 1), z2] for m in levels], dtype=complex)
    ua, ub = du.at(a), du.at(b)
    ea, eb = exact.at(a), exact.at(b)
    dist = np.abs(a[:, 0] - b[:, 0])
    q_prime = np.abs(ua - ub) / dist**alpha_prime
    q_alpha = np.abs(ua - ub) / dist**datum.alpha
    o_prime = np.abs(ea - eb) / dist**alpha_prime
    err = np.maximum(np.abs(ua - ea), np.abs(ub - eb))
    verdicts = {
        "alpha_prime_increasing": strictly_increasing(q_prime),
        "alpha_prime_ratio": bool(np.all(np.asarray(growth_ratios(q_prime)) >= KERZMAN_MIN_RATIO)),
        "alpha_bounded": bool(q_alpha.max() <= KERZMAN_ALPHA_SPREAD * q_alpha.min()),
    }
    return TrendReport(
        "kerzman", "m", levels,
        {"quotient_alpha_prime": list(q_prime), "quotient_alpha": list(q_alpha),
         "oracle_alpha_prime": list(o_prime), "abs_error_vs_exact": list(err)},
        verdicts,
        {"quotient_alpha_prime": growth_ratios(q_prime), "quotient_alpha": growth_ratios(q_alpha)},
        {"theoretical_ratio": 2.0 ** (alpha_prime - datum.alpha)},
        {"k": datum.k, "alpha": datum.alpha, "alpha_prime": alpha_prime, "z2": [float(np.real(z2)), float(np.imag(z2))],
         "boundary_nodes": cfg.boundary_nodes, "config_hash": cfg.digest()})


# ---------------------------------------------------------------------------
# Tumanov datum


@dataclass(frozen=True, eq=False)
class TumanovDatum:
    """h~ on b(disc) x disc and its discretized inf-convolution extension.

    ``n_angles`` boundary angles and a lambda lattice of pitch ``pitch``
    form the sample set; ``M`` is a Hoelder norm bound valid on that set.
    """

    alpha: float = 0.5
    n_angles: int = 2048
    pitch: float = 0.02

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_angles < 8 or self.n_angles % 2:
            raise ValueError("n_angles must be even and >= 8")
        if not 0 < self.pitch < 1:
            raise ValueError("pitch must lie in (0, 1)")

    def h_tilde(self, theta, lam):
        a = self.alpha
        theta = np.asarray(theta, dtype=float)
        r = np.abs(np.asarray(lam))
        # the four cases collapse to min(|lambda|^a, g(theta))
        g = np.where(theta < 0, np.abs(theta) ** (2 * a), np.abs(theta) ** a)
        return np.minimum(r**a, g)

    @cached_property
    def angles(self) -> np.ndarray:
        return -np.pi + 2 * np.pi * np.arange(self.n_angles) / self.n_angles

    @cached_property
    def lattice(self) -> np.ndarray:
        n = int(np.ceil(1.0 / self.pitch))
        ax = self.pitch * np.arange(-n, n + 1)
        lam = (ax[:, None] + 1j * ax[None, :]).ravel()
        return lam[np.abs(lam) < 1.0]

    @cached_property
    def sample_values(self) -> np.ndarray:
        """h~ on angles x lattice, shape (n_angles, n_lattice)."""
        return self.h_tilde(self.angles[:, None], self.lattice[None, :])

    @cached_property
    def M(self) -> float:
        """sup |h~| plus a bound for its alpha-Hoelder constant on the sample set.

        h~ = min(A(lambda), G(theta)) with A = |lambda|^a (constant 1) and
        G = min(g, 1); min is Hoelder with the larger of the two constants,
        and G's constant in the chordal metric is enumerated over the angles.
        """
        a = self.alpha
        th = self.angles
        G = np.minimum(np.where(th < 0, np.abs(th) ** (2 * a), np.abs(th) ** a), 1.0)
        chord = np.abs(np.exp(1j * th)[:, None] - np.exp(1j * th)[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.abs(G[:, None] - G[None, :]) / chord**a
        hg = float(np.nanmax(np.where(chord > 0, q, 0.0)))
        return float(self.sample_values.max()) + max(1.0, hg)


def tumanov_h_tilde(datum: TumanovDatum, theta, lam):
    theta_a = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta_a) > np.pi):
        raise ValueError("theta must lie in [-pi, pi]")
    if np.any(np.abs(np.asarray(lam)) >= 1):
        raise ValueError("lambda must lie in the open unit disc")
    out = datum.h_tilde(theta_a, lam)
    return float(out) if out.ndim == 0 else out


def mcshane_inf(datum: TumanovDatum, z_prime) -> np.ndarray:
    """inf over samples w of h~(w) + M |z' - w|^alpha for points z' = (z1, z3), shape (P, 2)."""
    pts = np.atleast_2d(np.asarray(z_prime, dtype=complex))
    a, M = datum.alpha, datum.M
    circ = np.exp(1j * datum.angles)
    lam = datum.lattice
    vals = datum.sample_values
    out = np.empty(len(pts))
    for i, (z1, z3) in enumerate(pts):
        d1 = np.abs(z1 - circ) ** 2
        d3 = np.abs(z3 - lam) ** 2
        # upper bound from the nearest sample in each coordinate, then prune
        i1, i3 = int(np.argmin(d1)), int(np.argmin(d3))
        bound = vals[i1, i3] + M * (d1[i1] + d3[i3]) ** (a / 2)
        reach = (bound / M) ** (2 / a)
        t = np.flatnonzero(d1 <= reach)
        l = np.flatnonzero(d3 <= reach)
        cand = vals[np.ix_(t, l)] + M * (d1[t][:, None] + d3[l][None, :]) ** (a / 2)
        out[i] = min(bound, float(cand.min()))
    return out


def mcshane_extend(datum: TumanovDatum, z_prime, boundary_tol: float = 1e-12):
    """The C^alpha extension h of h~.

    On b(disc) x disc any extension equals h~, which is used there exactly;
    elsewhere the discretized inf-convolution is returned.
    """
    pts = np.atleast_2d(np.asarray(z_prime, dtype=complex))
    on = np.abs(np.abs(pts[:, 0]) - 1.0) <= boundary_tol
    out = np.empty(len(pts))
    if on.any():
        out[on] = datum.h_tilde(np.angle(pts[on, 0]), pts[on, 1])
    if (~on).any():
        out[~on] = mcshane_inf(datum, pts[~on])
    return float(out[0]) if np.ndim(z_prime) == 1 else out


def tumanov_h(datum: TumanovDatum) -> FieldFunction:
    """h(z1, z3) as a field on the tridisc (independent of z2)."""

    def func(z1, z2, z3):
        shape = np.broadcast(z1, z2, z3).shape
        z1 = np.broadcast_to(z1, shape).ravel()
        z3 = np.broadcast_to(z3, shape).ravel()
        out = np.empty(z1.size)
        on = np.abs(np.abs(z1) - 1.0) <= 1e-12
        out[on] = datum.h_tilde(np.angle(z1[on]), z3[on])
        if (~on).any():
            uniq, inv = np.unique(np.stack([z1[~on], z3[~on]], axis=1), axis=0,
                                  return_inverse=True)
            out[~on] = mcshane_inf(datum, uniq)[inv.ravel()]
        return out.reshape(shape).astype(complex)

    return FieldFunction(func, 3, frozenset({1, 3}), name=f"h[alpha={datum.alpha:g}]")


def tumanov_form(datum: TumanovDatum) -> Form01Tri:
    zero = constant(0.0, 3)
    return Form01Tri(zero, tumanov_h(datum), zero, f"tridisc-tumanov(alpha={datum.alpha:g})")


def tumanov_blowup_scan(datum: TumanovDatum, epsilons=(1e-1, 3e-2, 1e-2, 3e-3),
                        cfg: QuadratureConfig = DEFAULT_CONFIG, levels=range(1, 17),
                        z2: complex = 0.5, oversample: float = 64.0,
                        workers=None) -> TrendReport:
    """Sampled H_3^alpha[S1 h](1 - eps) over dyadic z3 pairs anchored at z3 = 0.

    For every eps the boundary node count is raised to keep 1 - eps outside
    the standoff collar, with ``oversample`` extra resolution for the kinks
    of h~.  The composed operator T2 S1 f is evaluated at the same points and
    compared with zbar2 S1 h.  The imaginary part of S1 h is tracked as a
    diagnostic.
    """
    eps = [float(e) for e in epsilons]
    if len(eps) < 2 or not np.all(np.diff(eps) < 0):
        raise ValueError("epsilons must be a decreasing list of at least two values")
    if not all(0 < e < 1 for e in eps):
        raise ValueError("epsilons must lie in (0, 1)")
    a = datum.alpha
    levels = list(levels)
    r = 2.0 ** -np.asarray(levels, dtype=float)
    tri = ProductDomain(tuple(polydisc(3).slices))
    form = tumanov_form(datum)
    full, imag, hi, fact, nodes, argmax = [], [], [], [], [], []
    ordering_ok = True
    for e in eps:
        c = replace(cfg, boundary_nodes=nodes_for_distance(e, cfg, oversample))
        s1h = boundary_operator(form.f2, tri, 1, c)
        pts = np.zeros((len(r) + 1, 3), dtype=complex)
        pts[:, 0] = 1 - e
        pts[:, 1] = z2
        pts[1:, 2] = r
        vals = s1h.at(pts)
        d = np.abs(vals[1:] - vals[0])
        q = d / r**a
        q_hi = d / r ** (a + 0.2)
        ordering_ok &= bool(np.allclose(q, q_hi * r**0.2, rtol=1e-12, atol=0))
        full.append(float(q.max()))
        argmax.append(float(r[int(np.argmax(q))]))
        imag.append(float((np.abs(vals[1:].imag - vals[0].imag) / r**a).max()))
        hi.append(float(q_hi.max()))
        u = solution_01_tridisc(form.f1, form.f2, form.f3, tri, c, workers).at(pts)
        fact.append(float(np.max(np.abs(u - np.conj(pts[:, 1]) * vals))))
        nodes.append(c.boundary_nodes)
    ratios = growth_ratios(full)
    verdicts = {
        "increasing": strictly_increasing(full),
        "ratio_threshold": bool(np.all(np.asarray(ratios) >= TUMANOV_MIN_RATIO)),
        "factorization": bool(max(fact) <= FACTORIZATION_TOL),
    }
    diagnostics = {
        "exponent_ordering": ordering_ok,
        "imag_part_increasing": strictly_increasing(imag),
        "imag_part_ratios": growth_ratios(imag),
    }
    return TrendReport(
        "tumanov", "epsilon", eps,
        {"holder_quotient": full, "imag_part_quotient": imag,
         "quotient_alpha_plus_0.2": hi, "factorization_error": fact,
         "argmax_z3": argmax, "boundary_nodes": [float(n) for n in nodes]},
        verdicts, {"holder_quotient": ratios, "imag_part_quotient": growth_ratios(imag)},
        diagnostics,
        {"alpha": a, "M": datum.M, "levels": levels, "z2": [float(np.real(z2)), float(np.imag(z2))], "config_hash": cfg.digest()})


# ---------------------------------------------------------------------------
# norm ratios


def default_family(alpha: float = 0.5) -> list:
    from .solver import gauss_bump, holder_cone, mixed_poly, polyconj

    return [polyconj(), kerzman_form(KerzmanDatum(0, alpha)), gauss_bump(),
            holder_cone(alpha), mixed_poly()]


def _hotspots(form: Form01, standoff: float) -> np.ndarray:
    spots = [[0.3 + 0j, 0.0 + 0j]]
    for var, value in form.singular:
        p = [0.3 + 0j, 0.5 + 0j]
        v = complex(value)
        if abs(v) > 1 - 2 * standoff:
            v = v / abs(v) * (1 - 2 * standoff)
        p[var - 1] = v
        spots.append(p)
    return np.array(spots)


def _sampled_norms(form: Form01, domain, alpha, cfg, grid, standoff, workers):
    pairs = grid_pairs(grid)
    spots = _hotspots(form, standoff)
    for j in (1, 2):
        pairs = pairs | dyadic_pairs(spots, j, range(2, 12), (1.0, -1.0, 1j, -1j), scale=0.5)
    pairs = pairs.restrict(domain, standoff)
    nf = form_norm(form.components, domain, 0, alpha, grid, pairs)
    if nf == 0:
        return 0.0, float("nan")
    u = solution_01(form, domain, cfg, workers)
    nu = float(np.max(np.abs(u.at(grid)))) + holder_seminorm(u, pairs, alpha).full_seminorm
    return nf, nu


def norm_ratio_study(family=None, domain: ProductDomain = None, alpha: float = 0.5,
                     cfg: QuadratureConfig = DEFAULT_CONFIG, spacing: float = 0.4,
                     standoff: float = 0.1, compare_refined: bool = True,
                     workers=None) -> TrendReport:
    """Sampled ||u||_{C^alpha} / ||f||_{C^alpha} for a family of closed forms.

    Zero data are reported as skipped (ratio NaN).  With ``compare_refined``
    the study is repeated under ``cfg.refined()`` and the drift of the
    largest ratio is a verdict.
    """
    family = default_family(alpha) if family is None else list(family)
    domain = polydisc() if domain is None else domain
    grid = product_grid(domain, spacing, standoff)
    nf, nu, ratio, skipped = [], [], [], []
    for form in family:
        a, b = _sampled_norms(form, domain, alpha, cfg, grid, standoff, workers)
        nf.append(a)
        nu.append(b)
        ratio.append(b / a if a > 0 else float("nan"))
        if a == 0:
            skipped.append(form.name)
    quantities = {"norm_f": nf, "norm_u": nu, "ratio": ratio}
    verdicts = {}
    drift = float("nan")
    if compare_refined:
        fine = cfg.refined()
        ratio_fine = []
        for form in family:
            a, b = _sampled_norms(form, domain, alpha, fine, grid, standoff, workers)
            ratio_fine.append(b / a if a > 0 else float("nan"))
        quantities["ratio_refined"] = ratio_fine
        m0, m1 = np.nanmax(ratio), np.nanmax(ratio_fine)
        drift = float(max(m0, m1) / min(m0, m1))
        verdicts["refinement_stable"] = drift <= REFINEMENT_DRIFT
    return TrendReport(
        "norm-ratio", "datum", list(range(len(family))), quantities, verdicts,
        diagnostics={"names": [f.name for f in family], "skipped": skipped, "drift": drift},
        meta={"alpha": alpha, "spacing": spacing, "standoff": standoff,
              "grid_size": int(len(grid)), "config_hash": cfg.digest()})
