"""engel-gmt command line: surface files in JSON, CSV reports on stdout or --out.

Exit codes: 0 success, 2 invalid input, 3 nonconvergence.
"""
import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction

from .algebra import StructureCoefficients
from .errors import ConvergenceError, EngelError
from .geometry import QuasiNorm, triangle_defect_sampler
from .parser import ParseError, parse_expression
from .quadrature import QuadratureSpec
from .surfaces import (
    SurfaceChart,
    coordinate_plane,
    degree_constraint_residuals,
    horizontality_residual,
    surface_degree,
)

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3
SEED_ENV = "ENGEL_GMT_SEED"

COLUMNS = {
    "degree": ("u1", "u2", "degree"),
    "beta": ("plane", "beta", "c1", "c2", "c3", "c4", "delta", "relative_delta"),
    "density": ("radius", "quotient", "centered", "limit", "error", "degree"),
    "stokes": ("radius", "line", "surface", "defect", "error", "ratio", "ratio_error", "prediction"),
    "blowup": ("component", "required", "slope", "residual", "graph_error"),
    "diverge": ("radius", "area", "error", "area_slope", "ratio_slope"),
    "residuals": ("quantity", "value"),
    "check-distance": ("samples", "seed", "kappa3", "kappa4", "triangle_defect", "lambda", "sandwich_in", "sandwich_out"),
}

EPILOG = "CSV columns:\n" + "\n".join(f"  {k}: {','.join(v)}" for k, v in COLUMNS.items())


class InvalidInput(EngelError, ValueError):
    pass


# ---------------------------------------------------------------- configuration


@dataclass
class RunConfig:
    kappa3: float = 1.0
    kappa4: float = 0.5
    zero_tol: float = 1e-9
    n: int = 64
    levels: int = 3
    mc_samples: int = 200_000
    atol: float = 1e-10
    rtol: float = 1e-3
    seed: int = 0
    out: str = None

    def validate(self):
        for name in ("kappa3", "kappa4", "zero_tol", "n", "levels", "mc_samples"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0):
                raise InvalidInput(f"config value {name} must be positive, got {v!r}")
        for name in ("atol", "rtol"):
            if getattr(self, name) < 0:
                raise InvalidInput(f"config value {name} must be nonnegative")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidInput("seed must be a nonnegative integer")
        return self

    def spec(self):
        return QuadratureSpec(n=self.n, levels=self.levels, mc_samples=self.mc_samples, seed=self.seed,
                              atol=self.atol, rtol=self.rtol)

    def norm(self, xi):
        return QuasiNorm(self.kappa3, self.kappa4, xi)


def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    bad = set(data) - known
    if bad:
        raise InvalidInput(f"unknown config keys: {', '.join(sorted(bad))}")
    return data


def resolve_config(args):
    cfg = RunConfig(**load_config(args.config))
    env = os.environ.get(SEED_ENV)
    if env is not None and args.seed is None:
        try:
            cfg.seed = int(env)
        except ValueError:
            raise InvalidInput(f"{SEED_ENV} must be an integer") from None
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    return cfg.validate()


# ---------------------------------------------------------------- surface files


@dataclass
class SurfaceFile:
    name: str
    components: tuple
    domain: tuple
    xi: StructureCoefficients
    points: tuple = field(default=())

    def chart(self):
        return SurfaceChart(self.components, self.domain, self.xi, self.name)


def _rational(v, what):
    if isinstance(v, bool):
        raise InvalidInput(f"{what}: expected a number")
    if isinstance(v, (int, str)):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise InvalidInput(f"{what}: malformed rational {v!r}") from None
    if isinstance(v, float):
        return Fraction(repr(v))
    raise InvalidInput(f"{what}: expected a number, got {v!r}")


def load_surface(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read surface file {path}: {exc}") from None
    comps = data.get("components")
    if not isinstance(comps, list) or len(comps) != 4:
        raise InvalidInput("surface file needs four component expressions")
    polys = []
    for k, text in enumerate(comps):
        try:
            polys.append(parse_expression(str(text)))
        except ParseError as exc:
            raise InvalidInput(f"component {k + 1}: {exc}") from None
    dom = data.get("domain", [[-1, 1], [-1, 1]])
    try:
        domain = tuple(tuple(_rational(v, "domain") for v in iv) for iv in dom)
        if len(domain) != 2 or any(len(iv) != 2 or not iv[0] < iv[1] for iv in domain):
            raise InvalidInput("domain must be two increasing intervals")
    except TypeError:
        raise InvalidInput("domain must be [[a, b], [c, d]]") from None
    xi_raw = data.get("xi", [1, 1, 0])
    if len(xi_raw) != 3:
        raise InvalidInput("xi needs three coefficients")
    try:
        xi = StructureCoefficients(*(_rational(v, "xi") for v in xi_raw))
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    pts = tuple(tuple(_rational(v, "points") for v in p) for p in data.get("points", []))
    return SurfaceFile(str(data.get("name", os.path.basename(path))), tuple(polys), domain, xi, pts)


def _pair(text, what):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise InvalidInput(f"{what} must be two comma-separated numbers")
    return tuple(_rational(p.strip(), what) for p in parts)


def _floats(text, what):
    try:
        vals = [float(Fraction(p.strip())) for p in text.split(",") if p.strip()]
    except (ValueError, ZeroDivisionError):
        raise InvalidInput(f"{what}: malformed list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise InvalidInput(f"{what} must be positive")
    return vals


def _point(args, surf):
    if args.point is not None:
        return _pair(args.point, "--point")
    if surf.points:
        return surf.points[0]
    return (Fraction(0), Fraction(0))


def _plane(text):
    names = [p.strip().lower() for p in text.split(",")]
    try:
        i, j = (int(n.lstrip("e")) for n in names)
    except ValueError:
        raise InvalidInput("--plane must look like e2,e3") from None
    if not (1 <= i < j <= 4):
        raise InvalidInput("--plane needs two distinct basis indices in 1..4, increasing")
    return i, j


def _num(v):
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------- commands


def cmd_degree(args, cfg):
    s = load_surface(args.surface).chart()
    rep = surface_degree(s, args.grid, cfg.zero_tol if not s.exact else None)
    rows = [(u1, u2, d) for u1, u2, d in rep.table]
    summary = f"degree={rep.degree} singular_points={len(rep.singular)}"
    return rows, summary, False


def cmd_beta(args, cfg):
    from .density import spherical_factor
    from .algebra import STANDARD

    i, j = _plane(args.plane)
    spec = replace(cfg.spec(), levels=args.refine)
    sf = spherical_factor(cfg.norm(STANDARD), coordinate_plane(i, j), spec)
    rows = [(f"e{i}e{j}", sf.value, *sf.center, sf.delta, sf.relative_delta)]
    bad = not sf.relative_delta <= cfg.rtol
    return rows, f"beta={sf.value!r}", bad


def cmd_density(args, cfg):
    from .density import federer_density

    surf = load_surface(args.surface)
    s = surf.chart()
    radii = _floats(args.radii, "--radii")
    est = federer_density(s, _point(args, surf), args.degree, radii, cfg.spec(), cfg.norm(s.xi))
    rows = [(r, qv, c, est.limit, est.error, est.degree) for r, qv, c in zip(est.radii, est.quotients, est.centered)]
    bad = not est.error <= cfg.atol + 0.02 * abs(est.limit)
    return rows, f"density={est.limit!r} ({est.note})", bad


def cmd_stokes(args, cfg):
    from .measures import stokes_check

    surf = load_surface(args.surface)
    s = surf.chart()
    center = _pair(args.center, "--center") if args.center else (0, 0)
    rows, bad = [], False
    for r in _floats(args.radius, "--radius"):
        rep = stokes_check(s, r, cfg.spec(), center)
        rows.append((r, rep.line.value, rep.surface.value, rep.defect, rep.error, rep.ratio,
                     rep.ratio_error, rep.prediction))
        bad |= not (rep.line.converged(cfg.atol, cfg.rtol) and rep.surface.converged(cfg.atol, cfg.rtol))
    return rows, f"stokes radii={len(rows)}", bad


def cmd_blowup(args, cfg):
    from .density import gamma_expansion

    surf = load_surface(args.surface)
    rep = gamma_expansion(surf.chart(), _point(args, surf), tol=None)
    rows = [(k, f.required, f.slope, f.residual, rep.graph_error) for k, f in sorted(rep.fits.items())]
    return rows, f"graph={rep.graph_indices} worst_slope={rep.worst!r}", False


def cmd_diverge(args, cfg):
    from .density import divergence_probe

    surf = load_surface(args.surface)
    s = surf.chart()
    radii = _floats(args.radii, "--radii") if args.radii else [2.0 ** -k for k in range(3, 10)]
    rep = divergence_probe(s, _point(args, surf), args.beta, radii, cfg.spec(), cfg.norm(s.xi))
    rows = [(r, a, e, rep.area_slope, rep.ratio_slope) for r, a, e in zip(rep.radii, rep.areas, rep.errors)]
    bad = any(e > cfg.atol + cfg.rtol * a for a, e in zip(rep.areas, rep.errors))
    return rows, f"area_slope={rep.area_slope!r} ratio_slope={rep.ratio_slope!r}", bad


def cmd_residuals(args, cfg):
    s = load_surface(args.surface).chart()
    res = degree_constraint_residuals(s, grid=args.grid)
    rows = [(k, v) for k, v in res.items()]
    rows.append(("horizontality", horizontality_residual(s, grid=args.grid)))
    return rows, "", False


def cmd_check_distance(args, cfg):
    from .algebra import STANDARD
    from .density import box_ball_lambda, verify_sandwich

    q = cfg.norm(STANDARD)
    defect = triangle_defect_sampler(q, args.samples, cfg.seed)
    lam = box_ball_lambda(q, args.samples, cfg.seed)
    bad_in, bad_out = verify_sandwich(q, lam, args.samples, cfg.seed + 1)
    rows = [(args.samples, cfg.seed, q.kappa3, q.kappa4, defect, lam, bad_in, bad_out)]
    return rows, f"triangle_defect={defect!r} lambda={lam!r}", False


COMMANDS = {
    "degree": cmd_degree,
    "beta": cmd_beta,
    "density": cmd_density,
    "stokes": cmd_stokes,
    "blowup": cmd_blowup,
    "diverge": cmd_diverge,
    "residuals": cmd_residuals,
    "check-distance": cmd_check_distance,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--seed", type=int, help=f"random seed (default from {SEED_ENV}, else 0)")

    p = argparse.ArgumentParser(prog="engel-gmt", description="Surface measures in the Engel group.",
                                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common],
                              epilog=f"columns: {','.join(COLUMNS[name])}")

    a = add("degree", "pointwise degree table on a grid")
    a.add_argument("--surface", required=True)
    a.add_argument("--grid", type=int, default=65)

    a = add("beta", "spherical factor of a coordinate plane")
    a.add_argument("--plane", required=True, help="e.g. e2,e3")
    a.add_argument("--refine", type=int, default=3)

    a = add("density", "Federer density along a radius schedule")
    a.add_argument("--surface", required=True)
    a.add_argument("--point", help="u1,u2 (default: first marked point or 0,0)")
    a.add_argument("--degree", type=int)
    a.add_argument("--radii", default="1/4,1/8,1/16")

    a = add("stokes", "line versus surface integral of theta4")
    a.add_argument("--surface", required=True)
    a.add_argument("--radius", required=True, help="one radius or a comma list")
    a.add_argument("--center", help="u1,u2")

    a = add("blowup", "decay exponents of the blow-up map")
    a.add_argument("--surface", required=True)
    a.add_argument("--point", help="u1,u2")

    a = add("diverge", "area slopes at a singular point")
    a.add_argument("--surface", required=True)
    a.add_argument("--point", help="u1,u2")
    a.add_argument("--beta", type=float, required=True)
    a.add_argument("--radii")

    a = add("residuals", "degree constraint and horizontality residuals")
    a.add_argument("--surface", required=True)
    a.add_argument("--grid", type=int, default=33)

    a = add("check-distance", "triangle inequality and box-ball sandwich sampling")
    a.add_argument("--samples", type=int, default=100_000)
    return p


def write_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("grid", "refine", "samples"):
        v = getattr(args, name, None)
        if v is not None and v < (2 if name == "refine" else 1):
            print(f"error: --{name} too small", file=sys.stderr)
            return EXIT_INVALID
    try:
        cfg = resolve_config(args)
        rows, summary, nonconverged = COMMANDS[args.command](args, cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ValueError, TypeError, EngelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = write_csv(COLUMNS[args.command], rows)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if summary:
        print(summary, file=sys.stderr)
    if nonconverged:
        print("warning: refinement did not meet the tolerance", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
