"""Command-line front end.

Exit status: 0 on success, 1 for usage, parse or I/O errors, 2 for domain
errors (invalid parameters or data), 3 when a fit does not converge (the
report is still written, with its convergence flag set).

Vectors are comma separated (``--xi 0,1``); matrices list rows separated by
semicolons (``--omega "1,0.5;0.5,2"``). ``--omega`` is the dispersion
matrix ``Omega``; for the ``spvii`` and ``spii`` families it must be a
correlation matrix.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .diagnostics import (
    NORMAL_FIT,
    SKEW_T_FIT,
    healy_points,
    healy_svg,
    write_healy_csv,
)
from .elliptical import DensityGenerator
from .exceptions import DomainError, SkewellError
from .inference import (
    MAX_ITER,
    Dataset,
    FitConfig,
    fit_mle,
    profile_loglik,
)
from .perturb import DEMO_PRESETS, BetaDemoParams, density_grid, write_density_grid
from .skew_elliptical import SkewEllipticalParams, se_cdf, se_logpdf, se_sample_conditioning
from .skew_normal import (
    SnParams,
    sn_cdf,
    sn_logpdf,
    sn_moments,
    sn_sample_conditioning,
    sn_sample_max,
    sn_sample_transformation,
)
from .skew_t import StParams, st_cdf, st_logpdf, st_moments, st_sample

__all__ = ["main", "build_parser"]

FAMILIES = ("sn", "st", "esn", "est", "spvii", "spii")
EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    """Bad command line, unreadable input or unwritable output."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- parsing


def _floats(text, what):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r} as numbers") from None


def _matrix(text, what):
    rows = [_floats(r, what) for r in text.split(";") if r.strip() != ""]
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError(f"{what} rows must have equal lengths")
    return np.array(rows)


def _grid_axis(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} must read lo:hi:count")
    lo, hi = _floats(parts[0], "grid"), _floats(parts[1], "grid")
    try:
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"grid count {parts[2]!r} is not an integer") from None
    if len(lo) != 1 or len(hi) != 1 or count < 1:
        raise UsageError(f"bad grid {text!r}")
    return np.linspace(lo[0], hi[0], count)


def _nu_floor(text):
    if text == "auto":
        return "auto"
    if text == "none":
        return None
    value = _floats(text, "--nu-floor")
    if len(value) != 1:
        raise UsageError("--nu-floor takes auto, none or a number")
    return value[0]


def _read_table(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    except UnicodeDecodeError:
        raise UsageError(f"{path} is not UTF-8 text") from None
    rows = [r for r in rows if r]
    if not rows:
        raise UsageError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def _columns(header, body, names, path):
    idx = []
    for name in names:
        if name not in header:
            raise UsageError(f"column {name!r} not in {path} (columns: {', '.join(header)})")
        idx.append(header.index(name))
    out = np.empty((len(body), len(idx)))
    for i, row in enumerate(body):
        for j, k in enumerate(idx):
            try:
                out[i, j] = float(row[k])
            except (ValueError, IndexError):
                raise UsageError(f"{path} line {i + 2}: column {names[j]!r} is not numeric") from None
    return out


def _load_dataset(args):
    header, body = _read_table(args.data)
    responses = [c.strip() for c in args.response.split(",") if c.strip()]
    if not responses:
        raise UsageError("--response names at least one column")
    covars = [c.strip() for c in (args.covariates or "").split(",") if c.strip()]
    y = _columns(header, body, responses, args.data)
    x = _columns(header, body, covars, args.data) if covars else None
    return Dataset.from_arrays(y, x, intercept=not args.no_intercept)


# ---------------------------------------------------------------- output


def _num(v):
    # shortest repr that round-trips
    return repr(float(v))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _json_text(obj):
    return json.dumps(_clean(obj), indent=2) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        raise UsageError(f"cannot write {path}: {err.strerror}") from None


def _rng(args, why):
    if args.seed is None:
        raise UsageError(f"--seed is required {why}")
    return np.random.default_rng(args.seed)


# ---------------------------------------------------------------- distributions


def _dim(args):
    for text, is_mat in ((args.xi, False), (args.alpha, False), (args.omega, True)):
        if text is not None:
            return _matrix(text, "--omega").shape[0] if is_mat else len(_floats(text, "vector"))
    return 1


def _dist(args):
    d = _dim(args)
    xi = _floats(args.xi, "--xi") if args.xi is not None else [0.0] * d
    omega = _matrix(args.omega, "--omega") if args.omega is not None else np.eye(d)
    alpha = _floats(args.alpha, "--alpha") if args.alpha is not None else [0.0] * d
    fam = args.family
    if fam in ("sn", "st") and args.tau not in (None, 0.0):
        raise DomainError(f"family {fam} has tau = 0; use e{fam} for the extended law")
    tau = 0.0 if args.tau is None else args.tau
    nu = 5.0 if args.nu is None else args.nu
    if fam in ("sn", "esn"):
        return SnParams(xi, omega, alpha, tau)
    if fam in ("st", "est"):
        return StParams(xi, omega, alpha, nu, tau)
    if fam == "spvii":
        M = (len(xi) + 1 + nu) / 2.0 if args.M is None else args.M
        gen = DensityGenerator.pvii(len(xi) + 1, M, nu)
    else:
        gen = DensityGenerator.pii(len(xi) + 1, 0.0 if args.nu is None else args.nu)
    return SkewEllipticalParams(xi, omega, alpha, gen)


def _points(args, d):
    if args.at is not None:
        pts = _matrix(args.at, "--at")
        if d == 1 and pts.shape[0] == 1 and pts.shape[1] > 1:
            pts = pts.T
    elif args.points is not None:
        header, body = _read_table(args.points)
        pts = _columns(header, body, header, args.points)
    else:
        raise UsageError("give evaluation points with --at or --points")
    if pts.shape[1] != d:
        raise DomainError(f"points have {pts.shape[1]} coordinates, the law has {d}")
    return pts


def _cmd_sample(args):
    rng = _rng(args, "for sample")
    if args.n < 1:
        raise DomainError("--n must be positive")
    p = _dist(args)
    fam, method = args.family, args.method
    if fam in ("sn", "esn"):
        draw = {"conditioning": sn_sample_conditioning, "transformation": sn_sample_transformation,
                "max": sn_sample_max}.get(method)
    elif fam in ("st", "est"):
        draw = st_sample if method == "conditioning" else None
    else:
        draw = se_sample_conditioning if method == "conditioning" else None
    if draw is None:
        raise DomainError(f"method {method!r} is not available for family {fam}")
    z = draw(p, rng, args.n)
    header = [f"y{j + 1}" for j in range(z.shape[1])]
    _emit(_csv_text(header, [[_num(v) for v in row] for row in z]), args.out)
    return EXIT_OK


def _logpdf(p, pts, fam):
    if fam in ("sn", "esn"):
        return sn_logpdf(pts, p)
    if fam in ("st", "est"):
        return st_logpdf(pts, p)
    return se_logpdf(pts, p)


def _table_out(args, names, pts, cols):
    header = [f"y{j + 1}" for j in range(pts.shape[1])] + names
    if args.format == "json":
        recs = [dict(zip(header, [*row, *vals])) for row, vals in zip(pts.tolist(), zip(*cols))]
        _emit(_json_text({"schema": f"skewell.{args.command}/1", "family": args.family,
                          "values": recs}), args.out)
    else:
        rows = [[*(_num(v) for v in row), *(_num(v) if isinstance(v, float) else v for v in vals)]
                for row, vals in zip(pts.tolist(), zip(*cols))]
        _emit(_csv_text(header, rows), args.out)


def _cmd_pdf(args):
    p = _dist(args)
    pts = _points(args, p.dim)
    lp = np.asarray(_logpdf(p, pts, args.family), dtype=float)
    _table_out(args, ["logpdf", "pdf"], pts, [lp.tolist(), np.exp(lp).tolist()])
    return EXIT_OK


def _cmd_cdf(args):
    p = _dist(args)
    pts = _points(args, p.dim)
    fam = args.family
    exact = p.dim == 1 and p.tau == 0.0 if fam in ("sn", "esn", "st", "est") else False
    rng = None if exact else _rng(args, "for a Monte Carlo CDF")
    out = []
    for y in pts:
        if fam in ("sn", "esn"):
            out.append(sn_cdf(y, p, rng, n_pairs=args.mc))
        elif fam in ("st", "est"):
            out.append(st_cdf(y, p, rng, n_pairs=args.mc))
        else:
            out.append(se_cdf(y, p, rng, n=args.mc))
    _table_out(args, ["cdf", "error", "method"], pts,
               [[r.value for r in out], [r.error for r in out], [r.method for r in out]])
    return EXIT_OK


def _cmd_moments(args):
    fam = args.family
    if fam in ("spvii", "spii"):
        raise DomainError("moments are available for sn, esn, st and est")
    p = _dist(args)
    m = sn_moments(p) if fam in ("sn", "esn") else st_moments(p, order=args.order)
    fields = {"mean": m.mean, "variance": m.variance, "gamma1": m.gamma1, "gamma2": m.gamma2}
    if args.format == "json":
        _emit(_json_text({"schema": "skewell.moments/1", "family": fam,
                          **{k: v for k, v in fields.items() if v is not None}}), args.out)
        return EXIT_OK
    rows = []
    for i, v in enumerate(m.mean):
        rows.append(["mean", i + 1, "", _num(v)])
    if m.variance is not None:
        for i, j in np.ndindex(m.variance.shape):
            rows.append(["variance", i + 1, j + 1, _num(m.variance[i, j])])
    for k in ("gamma1", "gamma2"):
        if fields[k] is not None:
            rows.append([k, "", "", _num(fields[k])])
    _emit(_csv_text(["quantity", "i", "j", "value"], rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- fitting


def _config(args):
    return FitConfig(max_iter=args.max_iter, grad_tol=args.grad_tol, nu_floor=_nu_floor(args.nu_floor))


def _status(res):
    return EXIT_NONCONVERGED if res.convergence == MAX_ITER else EXIT_OK


def _cmd_fit(args):
    if args.family != "st":
        raise DomainError("fit supports --family st only")
    data = _load_dataset(args)
    res = fit_mle(data, _config(args))
    report = res.to_dict()
    report["response"] = args.response.split(",")
    report["covariates"] = [c for c in (args.covariates or "").split(",") if c]
    report["intercept"] = not args.no_intercept
    _emit(_json_text(report), args.out)
    if args.healy is not None:
        buf = io.StringIO()
        write_healy_csv(buf, healy_points(res, data, SKEW_T_FIT))
        _emit(buf.getvalue(), args.healy)
    return _status(res)


def _cmd_healy(args):
    data = _load_dataset(args)
    status = EXIT_OK
    if args.fit_family == "normal":
        series = healy_points(None, data, NORMAL_FIT, args.positions)
    else:
        res = fit_mle(data, _config(args))
        status = _status(res)
        series = healy_points(res, data, SKEW_T_FIT, args.positions)
    buf = io.StringIO()
    write_healy_csv(buf, series)
    _emit(buf.getvalue(), args.out)
    if args.svg is not None:
        _emit(healy_svg(series), args.svg)
    return status


def _cmd_profile(args):
    data = _load_dataset(args)
    which = [w.strip() for w in args.which.split(",") if w.strip()]
    grids = [_grid_axis(g) for g in (args.grid or [])]
    if len(grids) != len(which):
        raise UsageError("give one --grid lo:hi:count per profiled parameter")
    cfg = _config(args)
    fit = fit_mle(data, cfg)
    prof = profile_loglik(data, which, grids, fit=fit, config=cfg, include_mle=args.include_mle)
    header = ["kind", *prof.names, "level", "loglik", "deviance"]
    rows = []
    for ix in np.ndindex(prof.deviance.shape):
        vals = [_num(ax[i]) for ax, i in zip(prof.axes, ix)]
        if prof.missing[ix]:
            rows.append(["missing", *vals, "", "", ""])
        else:
            rows.append(["grid", *vals, "", _num(prof.loglik[ix]), _num(prof.deviance[ix])])
    blanks = [""] * len(prof.names)
    rows.append(["mle", *(_num(prof.mle[n]) for n in prof.names), "", _num(prof.loglik_hat), "0"])
    for level, value in prof.thresholds.items():
        rows.append(["threshold", *blanks, _num(level), "", _num(value)])
    _emit(_csv_text(header, rows), args.out)
    return _status(fit)


def _cmd_demo(args):
    if args.params is not None:
        vals = _floats(args.params, "--params")
        if len(vals) != 6:
            raise UsageError("--params takes a,b,p1,p2,q1,q2")
        params = BetaDemoParams(*vals)
    else:
        if args.preset not in DEMO_PRESETS:
            raise UsageError(f"unknown preset {args.preset!r} (choose from {', '.join(DEMO_PRESETS)})")
        params = DEMO_PRESETS[args.preset]
    if args.grid < 2:
        raise DomainError("--grid must be at least 2")
    buf = io.StringIO()
    write_density_grid(buf, density_grid(params, args.grid))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_dist(sp):
    sp.add_argument("--family", choices=FAMILIES, default="st")
    sp.add_argument("--xi", help="location vector (default 0)")
    sp.add_argument("--omega", help="dispersion matrix, rows separated by ';' (default I)")
    sp.add_argument("--alpha", help="shape vector (default 0)")
    sp.add_argument("--nu", type=float, help="degrees of freedom (st, est, spvii; default 5) "
                    "or PII exponent (spii; default 0)")
    sp.add_argument("--tau", type=float, help="extension parameter (esn, est)")
    sp.add_argument("--M", type=float, help="PVII exponent of the joint generator "
                    "(default (d + 1 + nu) / 2)")


def _add_points(sp):
    sp.add_argument("--at", help="evaluation points, coordinates ',' and points ';'")
    sp.add_argument("--points", help="CSV file of evaluation points (all columns)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_data(sp):
    sp.add_argument("--data", required=True, help="CSV file with a header row")
    sp.add_argument("--response", required=True, help="response column names, comma separated")
    sp.add_argument("--covariates", help="covariate column names, comma separated")
    sp.add_argument("--no-intercept", action="store_true", help="omit the intercept column")
    sp.add_argument("--nu-floor", default="auto", help="auto (d/(n-1) + 0.01), none or a number")
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--grad-tol", type=float, default=1e-6)


def build_parser():
    ap = _Parser(prog="skewell", description="Skew-elliptical distributions and skew-t regression.")
    ap.add_argument("--version", action="version", version=f"skewell {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("fit", help="maximum likelihood skew-t regression; JSON report")
    sp.add_argument("--family", choices=FAMILIES, default="st")
    _add_data(sp)
    sp.add_argument("--out", help="report path (default stdout)")
    sp.add_argument("--healy", help="also write the Healy series CSV here")

    sp = sub.add_parser("sample", help="random draws as CSV")
    _add_dist(sp)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--method", choices=("conditioning", "transformation", "max"),
                    default="conditioning")
    sp.add_argument("--out")

    for name, hlp in (("pdf", "density values"), ("cdf", "distribution function values")):
        sp = sub.add_parser(name, help=hlp)
        _add_dist(sp)
        _add_points(sp)
        sp.add_argument("--out")
        if name == "cdf":
            sp.add_argument("--seed", type=int, help="needed when the CDF is estimated by Monte Carlo")
            sp.add_argument("--mc", type=int, default=1_000_000, help="Monte Carlo sample size")

    sp = sub.add_parser("moments", help="mean, variance, skewness and kurtosis")
    _add_dist(sp)
    sp.add_argument("--order", type=int, help="highest order (skew-t only)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")

    sp = sub.add_parser("profile", help="profile deviance grid with chi-square thresholds")
    _add_data(sp)
    sp.add_argument("--which", required=True, help="alpha, log_nu or log_omega; one or two, comma separated")
    sp.add_argument("--grid", action="append",
                    help="lo:hi:count, once per profiled parameter; write --grid=-4:1:11 when lo < 0")
    sp.add_argument("--no-mle-point", dest="include_mle", action="store_false",
                    help="do not insert the estimate into the grid")
    sp.add_argument("--out")

    sp = sub.add_parser("healy", help="Healy plot series as CSV (optionally SVG)")
    _add_data(sp)
    sp.add_argument("--fit-family", choices=("st", "normal"), default="st")
    sp.add_argument("--positions", choices=("hazen", "healy"), default="hazen")
    sp.add_argument("--out")
    sp.add_argument("--svg")

    sp = sub.add_parser("demo-perturb", help="density grid of a perturbed bivariate Beta")
    sp.add_argument("--preset", default="mild", help=f"one of {', '.join(DEMO_PRESETS)}")
    sp.add_argument("--params", help="a,b,p1,p2,q1,q2 (overrides --preset)")
    sp.add_argument("--grid", type=int, default=101, help="points per axis")
    sp.add_argument("--out")
    return ap


_COMMANDS = {
    "fit": _cmd_fit,
    "sample": _cmd_sample,
    "pdf": _cmd_pdf,
    "cdf": _cmd_cdf,
    "moments": _cmd_moments,
    "profile": _cmd_profile,
    "healy": _cmd_healy,
    "demo-perturb": _cmd_demo,
}


def main(argv=None):
    """Run the command line; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as err:
        print(f"skewell: error: {err}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, SkewellError, ValueError, np.linalg.LinAlgError) as err:
        print(f"skewell: domain error: {err}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
