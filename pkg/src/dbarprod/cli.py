"""Command-line front end.

    dbarprod solve polyconj
    dbarprod verify pompeiu dbar
    dbarprod holder gauss-bump --alpha 0.5
    dbarprod example kerzman --k 0 --alpha 0.5 --alpha-prime 0.75 --levels 3 8
    dbarprod example tumanov --alpha 0.5 --epsilons 0.1 0.03 0.01 0.003
    dbarprod convergence

Exit codes: 0 ok, 1 usage, 2 verification or trend failure, 3 numerical
failure (standoff, cell budget, empty grid).  Errors are also printed as a
one-line JSON object on stderr and written to ``error.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .cauchy import NearBoundaryError, QuadratureConfig, boundary_cauchy
from .experiments import (KerzmanDatum, TumanovDatum, kerzman_scan, tumanov_blowup_scan)
from .fields import FieldFunction, multi_index
from .geometry import (EmptyGridError, GeometryError, PlanarDomain, ProductDomain, annulus,
                       arclength_reparametrize, curve_from_nodes, disc, ellipse,
                       product_grid, smoothed_square)
from .holder import default_pairs, holder_seminorm
from .parallel import set_default_workers
from .quadtree import QuadratureBudgetError
from .solver import (FORMS, ClosednessError, Form01, Form01Tri, Form02, solution_01,
                     solution_01_tridisc, solution_02)
from .verify import dbar_residual, holomorphy_check, pompeiu_check, prop31_identity

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_NUMERIC = 0, 1, 2, 3
OUTPUT_ENV = "DBARPROD_OUTPUT_DIR"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration

DEFAULT_THRESHOLDS = {"pompeiu": 1e-3, "dbar": 1e-2, "holomorphy": 1e-4, "s1t2": 1e-3}


@dataclass
class RunConfig:
    slices: list = field(default_factory=lambda: [{"kind": "disc"}, {"kind": "disc"}])
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    spacing: float = 0.25
    standoff: float = 0.1
    h_fd: float = 1e-4
    workers: int = 1
    output_dir: str = "dbarprod-out"
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    kerzman: dict = field(default_factory=lambda: {
        "k": 0, "alpha": 0.5, "alpha_prime": 0.75, "m_min": 3, "m_max": 8, "z2": 0.5,
        "oversample": 4.0})
    tumanov: dict = field(default_factory=lambda: {
        "alpha": 0.5, "epsilons": [1e-1, 3e-2, 1e-2, 3e-3], "level_max": 16, "z2": 0.5,
        "oversample": 64.0, "n_angles": 2048, "pitch": 0.02})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quadrature"] = asdict(self.quadrature)
        return d

    def digest(self) -> str:
        import hashlib

        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _slice_from_spec(spec: dict, nodes: int) -> PlanarDomain:
    spec = dict(spec)
    kind = spec.pop("kind", "disc")
    arc = spec.pop("arclength", False)
    center = complex(*spec.pop("center", (0.0, 0.0)))
    n = int(spec.pop("nodes", nodes))
    if kind == "disc":
        slc = disc(center, float(spec.pop("radius", 1.0)), n)
    elif kind == "ellipse":
        slc = PlanarDomain((ellipse(float(spec.pop("a", 2.0)), float(spec.pop("b", 1.0)),
                                    center, n),))
    elif kind == "square":
        slc = PlanarDomain((smoothed_square(float(spec.pop("half_width", 1.0)),
                                            int(spec.pop("power", 2)), center, n),))
    elif kind == "annulus":
        slc = annulus(float(spec.pop("inner", 0.5)), float(spec.pop("outer", 1.0)), n)
    elif kind == "nodes":
        pts = spec.pop("points")
        slc = PlanarDomain((curve_from_nodes([complex(x, y) for x, y in pts]),))
    else:
        raise UsageError(f"unknown slice kind {kind!r}")
    if spec:
        raise UsageError(f"unknown slice parameters {sorted(spec)} for kind {kind!r}")
    if arc:
        slc = PlanarDomain(tuple(arclength_reparametrize(c) for c in slc.curves))
    return slc


def build_domain(cfg: RunConfig, dim: int = None) -> ProductDomain:
    specs = list(cfg.slices)
    if dim is not None:
        specs = (specs + [{"kind": "disc"}] * dim)[:dim]
    return ProductDomain(tuple(_slice_from_spec(s, cfg.quadrature.boundary_nodes) for s in specs))


def validate_config(cfg: RunConfig) -> RunConfig:
    for name in ("spacing", "standoff", "h_fd"):
        if not getattr(cfg, name) > 0:
            raise UsageError(f"{name} must be positive")
    if int(cfg.workers) < 1:
        raise UsageError("workers must be positive")
    for name, t in cfg.thresholds.items():
        if t < 0:
            raise UsageError(f"threshold {name} must be nonnegative")
    dom = build_domain(cfg)
    n = cfg.quadrature.boundary_nodes
    diam = max(s.diameter for s in dom.slices)
    need = 5 * (2 * np.pi / n) * diam / (2 * np.pi)
    # the actual node spacing can exceed diam / n; hold to the larger rule
    need = max(need, cfg.quadrature.standoff_factor * max(s.max_node_spacing(n) for s in dom.slices))
    if cfg.standoff < need:
        raise UsageError(f"standoff {cfg.standoff} below the minimum {need:.4g} for "
                         f"{n} boundary nodes")
    return cfg


def load_config(path=None) -> RunConfig:
    raw = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        try:
            raw = json.loads(text) if p.suffix == ".json" else tomllib.loads(text.decode())
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    base = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    kw = {}
    for key, value in raw.items():
        if key == "quadrature":
            try:
                kw[key] = QuadratureConfig(**value)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad quadrature settings: {exc}") from exc
        elif key in ("thresholds", "kerzman", "tumanov"):
            merged = dict(getattr(base, key))
            bad = set(value) - set(merged)
            if bad:
                raise UsageError(f"unknown {key} keys {sorted(bad)}")
            merged.update(value)
            kw[key] = merged
        else:
            kw[key] = value
    return replace(base, **kw)


# ---------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return repr(float(x))


def points_csv(points: np.ndarray, values: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = points.shape[1]
    head = []
    for j in range(1, dim + 1):
        head += [f"re z{j}", f"im z{j}"]
    w.writerow(head + ["re u", "im u"])
    for p, v in zip(points, values):
        row = []
        for c in p:
            row += [_fmt(c.real), _fmt(c.imag)]
        w.writerow(row + [_fmt(v.real), _fmt(v.imag)])
    return buf.getvalue()


def _outdir(args, cfg: RunConfig) -> Path:
    d = args.output_dir or os.environ.get(OUTPUT_ENV) or cfg.output_dir
    path = Path(d)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str):
    path.write_text(text)
    return str(path)


def _manifest(cfg: RunConfig, command: str, started: float, extra=None) -> dict:
    m = {"command": command, "version": __version__, "config_hash": cfg.digest(),
         "quadrature": asdict(cfg.quadrature), "quadrature_hash": cfg.quadrature.digest(),
         "spacing": cfg.spacing, "standoff": cfg.standoff, "h_fd": cfg.h_fd,
         "workers": cfg.workers, "wall_time_s": time.perf_counter() - started}
    m.update(extra or {})
    return m


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"form parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except ValueError:
            out[k] = v
    return out


def _form(name: str, params: dict):
    if name not in FORMS:
        raise UsageError(f"unknown form {name!r}; known: {', '.join(sorted(FORMS))}")
    try:
        return FORMS[name].factory(**params)
    except TypeError as exc:
        raise UsageError(f"bad parameters for form {name!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    form = _form(args.form, _parse_params(args.param))
    q = cfg.quadrature
    if isinstance(form, Form01Tri):
        dom = build_domain(cfg, 3)
        u = solution_01_tridisc(form.f1, form.f2, form.f3, dom, q, cfg.workers)
    elif isinstance(form, Form02):
        dom = build_domain(cfg, 2)
        u = solution_02(form, dom, q, cfg.workers)
    else:
        dom = build_domain(cfg, 2)
        u = solution_01(form, dom, q, cfg.workers)
    grid = product_grid(dom, cfg.spacing, cfg.standoff)
    values = u.at(grid)
    out = _outdir(args, cfg)
    csv_path = _write(out / (args.output or f"solve-{args.form}.csv"), points_csv(grid, values))
    man = _manifest(cfg, "solve", started, {"form": args.form, "csv": csv_path,
                                            "grid_size": int(len(grid))})
    _write(out / f"solve-{args.form}.manifest.json", json.dumps(man, indent=2))
    print(csv_path)
    return EXIT_OK


def _pompeiu_functions():
    def fn(func, dbar_func, name):
        idx = multi_index(2, (1, True))
        return FieldFunction(func, derivatives={idx: dbar_func}, order=1, name=name)

    zero = (lambda z1, z2: 0 * z1 + 0 * z2)
    return [fn(lambda z1, z2: z1**3 - 2 * z1 + 0 * z2, zero, "zeta^3-2zeta"),
            fn(lambda z1, z2: np.conj(z1) + 0 * z2, lambda z1, z2: 1 + 0 * z1 + 0 * z2, "conj"),
            fn(lambda z1, z2: np.abs(z1) ** 2 + 0 * z2, lambda z1, z2: z1 + 0 * z2, "abs2")]


def _s1t2_functions():
    return [FieldFunction(lambda z1, z2: np.conj(z1) + 0 * z2, name="zbar1"),
            FieldFunction(lambda z1, z2: z1**2 * np.conj(z2), name="z1^2 zbar2"),
            FieldFunction(lambda z1, z2: z1.real * np.conj(z2), name="Re(z1) zbar2")]


def run_identity(name: str, cfg: RunConfig):
    from .cauchy import apply_chain
    from .solver import gauss_bump, polyconj

    q = cfg.quadrature
    dom = build_domain(cfg, 2)
    grid = product_grid(dom, cfg.spacing, cfg.standoff)
    if name == "pompeiu":
        return [pompeiu_check(f, 1, dom, grid, q, cfg.h_fd, cfg.workers)
                for f in _pompeiu_functions()], False
    if name == "dbar":
        reps = []
        for form in (polyconj(), gauss_bump()):
            u = solution_01(form, dom, q, cfg.workers)
            reps.append(dbar_residual(u, form, dom, grid, cfg.h_fd, q))
        return reps, True
    if name == "holomorphy":
        g = apply_chain(gauss_bump().f2, dom, [("S", 1), ("T", 2)], q, cfg.workers)
        return [holomorphy_check(g, 1, dom, grid, cfg.h_fd, q)], True
    if name == "s1t2":
        if not all(np.allclose(np.abs(c.derivative_nodes), 1.0) for c in dom.slice(1).curves):
            dom = ProductDomain((PlanarDomain(tuple(arclength_reparametrize(c)
                                                    for c in dom.slice(1).curves)),
                                 dom.slice(2)))
        return [prop31_identity(f, dom, grid, q, cfg.h_fd, cfg.workers)
                for f in _s1t2_functions()], False
    raise UsageError(f"unknown identity {name!r}; known: {', '.join(DEFAULT_THRESHOLDS)}")


def cmd_verify(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    for name in args.identities:
        if name not in DEFAULT_THRESHOLDS:
            raise UsageError(f"unknown identity {name!r}; known: {', '.join(DEFAULT_THRESHOLDS)}")
    out = _outdir(args, cfg)
    ok = True
    summary = []
    for name in args.identities:
        threshold = args.threshold if args.threshold is not None else cfg.thresholds[name]
        reports, relative = run_identity(name, cfg)
        for rep in reports:
            passed = rep.passed(threshold, relative)
            ok &= passed
            entry = rep.to_dict()
            entry.update({"threshold": threshold, "relative": relative, "passed": passed})
            summary.append(entry)
            err = rep.relative_error if relative else rep.max_abs_error
            print(f"{'PASS' if passed else 'FAIL'} {rep.name}: {err:.3e} (threshold {threshold:g})")
    man = _manifest(cfg, "verify", started, {"reports": summary, "passed": ok})
    _write(out / "verify.json", json.dumps(man, indent=2))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_holder(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    form = _form(args.form, _parse_params(args.param))
    if not isinstance(form, Form01):
        raise UsageError("holder works on (0,1) forms on two slices")
    dom = build_domain(cfg, 2)
    grid = product_grid(dom, cfg.spacing, cfg.standoff)
    hot = np.array([[0.3, 0.0]], dtype=complex)
    pairs = default_pairs(dom, grid, hot, cfg.standoff, range(2, 12))
    target = solution_01(form, dom, cfg.quadrature, cfg.workers) if args.target == "solution" \
        else {"f1": form.f1, "f2": form.f2}[args.target]
    rep = holder_seminorm(target, pairs, args.alpha)
    out = _outdir(args, cfg)
    body = rep.to_dict()
    body.update(_manifest(cfg, "holder", started, {"form": args.form, "target": args.target}))
    path = _write(out / f"holder-{args.form}-{args.target}.json", json.dumps(body, indent=2))
    print(f"H^{args.alpha:g}[{args.target}] = {rep.full_seminorm:.6g} over {rep.pair_count} pairs")
    print(path)
    return EXIT_OK


_GNUPLOT = """set logscale xy
set xlabel '{x}'
set ylabel 'sampled quotient'
set key left top
set datafile separator ','
plot {plots}
"""


def _gnuplot(csv_name: str, report) -> str:
    cols = list(report.quantities)
    plots = ", ".join(f"'{csv_name}' every ::1 using 1:{i + 2} with linespoints title '{c}'"
                      for i, c in enumerate(cols[:2]))
    return _GNUPLOT.format(x=report.parameter, plots=plots)


def cmd_example(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    q = cfg.quadrature
    if args.which == "kerzman":
        p = dict(cfg.kerzman)
        for key in ("k", "alpha", "alpha_prime"):
            if getattr(args, key) is not None:
                p[key] = getattr(args, key)
        if args.levels:
            p["m_min"], p["m_max"] = args.levels
        if not p["alpha"] < p["alpha_prime"] < 1:
            raise UsageError("need alpha < alpha' < 1")
        if p["m_min"] > p["m_max"]:
            raise UsageError("levels must be given as m_min m_max with m_min <= m_max")
        try:
            datum = KerzmanDatum(int(p["k"]), float(p["alpha"]))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        report = kerzman_scan(datum, float(p["alpha_prime"]), range(p["m_min"], p["m_max"] + 1),
                              q, complex(p["z2"]), float(p["oversample"]), cfg.workers)
    else:
        p = dict(cfg.tumanov)
        if args.alpha is not None:
            p["alpha"] = args.alpha
        if args.epsilons:
            p["epsilons"] = args.epsilons
        try:
            datum = TumanovDatum(float(p["alpha"]), int(p["n_angles"]), float(p["pitch"]))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        eps = [float(e) for e in p["epsilons"]]
        if len(eps) < 2 or any(b >= a for a, b in zip(eps, eps[1:])):
            raise UsageError("epsilons must be strictly decreasing (at least two values)")
        report = tumanov_blowup_scan(datum, eps, q, range(1, int(p["level_max"]) + 1),
                                     complex(p["z2"]), float(p["oversample"]), cfg.workers)
    out = _outdir(args, cfg)
    stem = f"example-{args.which}"
    _write(out / f"{stem}.csv", report.to_csv())
    body = report.to_dict()
    body["manifest"] = _manifest(cfg, f"example {args.which}", started)
    _write(out / f"{stem}.json", json.dumps(body, indent=2))
    if args.plot:
        _write(out / f"{stem}.gp", _gnuplot(f"{stem}.csv", report))
    for k, v in report.verdicts.items():
        print(f"{'PASS' if v else 'FAIL'} {k}")
    return EXIT_OK if report.passed else EXIT_FAIL


def convergence_table(cfg: RunConfig, start: int = 16, max_nodes: int = 1024, z=0.6 + 0.3j):
    """Error of S[f] against f for f = exp(zeta) / (zeta - 2) on the unit disc."""
    func = (lambda z1, z2: np.exp(z1) / (z1 - 2.0) + 0 * z2)
    f = FieldFunction(func, name="exp/(z-2)")
    exact = complex(func(np.asarray(z), np.asarray(0j)))
    rows = []
    n = start
    while n <= max_nodes:
        q = replace(cfg.quadrature, boundary_nodes=n, standoff_factor=1e-6)
        dom = ProductDomain((disc(n=n), disc(n=n)))
        val = boundary_cauchy(f, dom, 1, np.array([z, 0j]), q)
        rows.append((n, abs(val - exact)))
        n *= 2
    return rows


def convergence_verdict(rows, floor: float = 1e-12, factor: float = 10.0) -> bool:
    for (_, e0), (_, e1) in zip(rows, rows[1:]):
        if e0 <= floor:
            break
        if not e1 <= e0 / factor:
            return False
    return rows[-1][1] <= floor or any(e <= floor for _, e in rows)


def cmd_convergence(args, cfg: RunConfig) -> int:
    started = time.perf_counter()
    rows = convergence_table(cfg, args.start, args.max_nodes)
    ok = convergence_verdict(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["boundary_nodes", "abs_error"])
    for n, e in rows:
        w.writerow([n, _fmt(e)])
        print(f"{n:6d} {e:.3e}")
    out = _outdir(args, cfg)
    _write(out / "convergence.csv", buf.getvalue())
    _write(out / "convergence.json", json.dumps(
        _manifest(cfg, "convergence", started, {"passed": ok}), indent=2))
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML or JSON run configuration")
    common.add_argument("--output-dir", help=f"output directory (overrides ${OUTPUT_ENV})")
    common.add_argument("--workers", type=int)
    common.add_argument("--spacing", type=float)
    common.add_argument("--standoff", type=float)
    common.add_argument("--h-fd", type=float)
    common.add_argument("--boundary-nodes", type=int)
    common.add_argument("--cell-budget", type=int)

    p = _Parser(prog="dbarprod", description="d-bar solver on product domains")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="sample a solution on the grid")
    s.add_argument("form")
    s.add_argument("--param", action="append", help="form parameter key=value")
    s.add_argument("--output", help="CSV file name inside the output directory")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", parents=[common], help="run identity checks")
    v.add_argument("identities", nargs="+")
    v.add_argument("--threshold", type=float, help="override every threshold")
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("holder", parents=[common], help="sampled Hoelder semi-norm")
    h.add_argument("form")
    h.add_argument("--alpha", type=float, default=0.5)
    h.add_argument("--target", choices=("solution", "f1", "f2"), default="solution")
    h.add_argument("--param", action="append")
    h.set_defaults(func=cmd_holder)

    e = sub.add_parser("example", help="counterexample scans")
    esub = e.add_subparsers(dest="which", required=True, parser_class=_Parser)
    k = esub.add_parser("kerzman", parents=[common])
    k.add_argument("--k", type=int)
    k.add_argument("--alpha", type=float)
    k.add_argument("--alpha-prime", dest="alpha_prime", type=float)
    k.add_argument("--levels", type=int, nargs=2, metavar=("M_MIN", "M_MAX"))
    k.add_argument("--plot", action="store_true", help="also write a gnuplot script")
    k.set_defaults(func=cmd_example)
    t = esub.add_parser("tumanov", parents=[common])
    t.add_argument("--alpha", type=float)
    t.add_argument("--epsilons", type=float, nargs="+")
    t.add_argument("--plot", action="store_true")
    t.set_defaults(func=cmd_example)

    c = sub.add_parser("convergence", parents=[common], help="boundary rule convergence gate")
    c.add_argument("--start", type=int, default=16)
    c.add_argument("--max-nodes", type=int, default=1024)
    c.set_defaults(func=cmd_convergence)
    return p


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    q = cfg.quadrature
    try:
        if args.boundary_nodes is not None:
            q = replace(q, boundary_nodes=args.boundary_nodes)
        if args.cell_budget is not None:
            q = replace(q, cell_budget=args.cell_budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cfg = replace(cfg, quadrature=q)
    for name in ("workers", "spacing", "standoff", "h_fd"):
        val = getattr(args, name, None)
        if val is not None:
            cfg = replace(cfg, **{name: val})
    return cfg


def _fail(args, code: int, exc: BaseException) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err), file=sys.stderr)
    try:
        d = getattr(args, "output_dir", None) or os.environ.get(OUTPUT_ENV)
        if d:
            Path(d).mkdir(parents=True, exist_ok=True)
            (Path(d) / "error.json").write_text(json.dumps(err, indent=2))
    except OSError:
        pass
    return code


def main(argv=None) -> int:
    args = None
    try:
        args = build_parser().parse_args(argv)
        cfg = validate_config(_apply_flags(load_config(args.config), args))
        set_default_workers(cfg.workers)
        return args.func(args, cfg)
    except UsageError as exc:
        return _fail(args, EXIT_USAGE, exc)
    except (NearBoundaryError, QuadratureBudgetError, EmptyGridError) as exc:
        return _fail(args, EXIT_NUMERIC, exc)
    except ClosednessError as exc:
        return _fail(args, EXIT_FAIL, exc)
    except (GeometryError, ValueError) as exc:
        return _fail(args, EXIT_USAGE, exc)
    except (ArithmeticError, RuntimeError, MemoryError) as exc:
        return _fail(args, EXIT_NUMERIC, exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
