"""Command line interface: ``spincurve <command> ...``.

Exit codes: 0 success, 2 precondition violated, 3 numerical check failed, 4 I/O.
"""

import argparse
import csv
import os
import sys

import numpy as np

from . import curves
from .bruhat import classify_so, classify_spin, inv_count
from .curvefile import read_curve, write_curve
from .curves import CurvatureProfile, curvature_torsion
from .decompose import CurvePair, compose3, decompose3
from .errors import CurveFileError, NumericalError, PreconditionError
from .frames_ode import curve_from_profile
from .spin_algebra import ONE, I, J, K, Spin4
from .surgery import DEFAULT_EPS, RRParams, SurgerySpec, add_loops, final_spin, hat_pair, relaxed_test_frame, sharp
from .verify import SUITES, run_suite

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

_UNITS = {"1": ONE, "i": I, "j": J, "k": K}


def quaternion_label(q, tol=1e-6):
    """``1``, ``-k`` etc. for signed basis quaternions, else the four components."""
    q = np.asarray(q, dtype=float)
    for name, u in _UNITS.items():
        for sign in ("", "-"):
            if np.linalg.norm(q - (u if not sign else -u)) < tol:
                return sign + name
    return "(" + ", ".join(f"{x:.6g}" for x in q) + ")"


def spin_label(z):
    if isinstance(z, Spin4):
        return f"({quaternion_label(z.left)}, {quaternion_label(z.right)})"
    return quaternion_label(z)


def _seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("SPINCURVE_SEED")
    return int(env) if env else 0


def _load_profile(path):
    """Profile from a curve file; sample files are converted through their Frenet data."""
    cf = read_curve(path)
    if cf.kind == "profile":
        return cf.to_profile()
    return curvature_torsion(cf.to_samples())


# -- commands ---------------------------------------------------------------------

DEFAULT_KIND = {"xi": "samples", "omega3": "samples"}


def cmd_gen(args):
    fam, n = args.family, args.n
    if args.kind is None:
        args.kind = DEFAULT_KIND.get(fam, "profile")
    if fam == "sigma":
        if args.kind == "samples":
            obj = curves.sigma(args.c, args.turns, n, args.reflect)
        else:
            obj = curves.sigma_profile(args.c, args.turns, n, args.reflect)
    elif fam == "xi":
        if not args.coef or not args.freq:
            raise PreconditionError("xi needs --coef and --freq")
        obj = curves.xi(args.coef, args.freq, n)
        if args.kind == "profile":
            obj = curvature_torsion(obj)
    else:
        make = {"gamma11": (curves.gamma_1_1, curves.gamma_1_1_profile),
                "gamma12": (curves.gamma_1_2, curves.gamma_1_2_profile),
                "omega3": (curves.omega3, curves.omega3_profile)}[fam]
        obj = make[0](n) if args.kind == "samples" else make[1](n)
    meta = {"family": fam}
    if isinstance(obj, CurvatureProfile):
        meta["final_spin"] = final_spin(obj)
    write_curve(args.out, obj, meta)
    print(f"wrote {fam} {args.kind} (n = {n}) to {args.out}")
    return EXIT_OK


def cmd_decompose(args):
    pair = decompose3(_load_profile(args.input))
    z = pair.final_spin()
    for side, path, zs in ((pair.left(), args.out_left, z.left), (pair.right(), args.out_right, z.right)):
        write_curve(path, side, {"final_spin": zs, "pair_final_spin": z})
    print(f"final spin frame {spin_label(z)}")
    return EXIT_OK


def cmd_compose(args):
    left, right = _load_profile(args.left), _load_profile(args.right)
    if left.dim != 2 or right.dim != 2:
        raise PreconditionError("compose expects two curves on S^2")
    if left.grid != right.grid:
        raise PreconditionError("left and right curves use different grids")
    if np.max(np.abs(left.v - right.v)) > 1e-12 * np.max(left.v):
        raise PreconditionError("left and right curves do not share their speed")
    pair = CurvePair(left.grid, left.v, left.kappa, right.kappa, breakpoints=left.breakpoints)
    prof = compose3(pair)
    write_curve(args.out, prof, {"final_spin": final_spin(prof)})
    print(f"wrote composed profile to {args.out}")
    return EXIT_OK


def _read_numbers(path):
    try:
        return np.loadtxt(path, dtype=float, ndmin=2)
    except OSError as exc:
        raise CurveFileError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise CurveFileError(f"{path}: not a numeric table ({exc})") from exc


def cmd_classify(args):
    if args.matrix:
        Q = _read_numbers(args.matrix)
        P = classify_so(Q)
        print(P)
        print(f"inv = {inv_count(P)}")
        return EXIT_OK
    if args.relaxed_test:
        z = relaxed_test_frame(*args.relaxed_test)
    else:
        vals = _read_numbers(args.spin).ravel()
        if vals.size == 4:
            z = vals
        elif vals.size == 8:
            z = Spin4(vals[:4], vals[4:])
        else:
            raise PreconditionError("a spin file holds 4 (Spin3) or 8 (Spin4) numbers")
    cell = classify_spin(z)
    print(cell.rep_so)
    print(f"inv = {inv_count(cell.rep_so)}")
    print(f"lifted cell of {spin_label(cell.lift)}")
    return EXIT_OK


def cmd_check(args):
    keys = sorted(SUITES) if args.all or not args.suites else []
    for s in args.suites or ():
        if s.isdigit() and int(s) in SUITES:
            keys.append(int(s))
        else:
            match = [k for k, (name, _) in SUITES.items() if s.lower() in name]
            if not match:
                raise PreconditionError(f"unknown suite {s!r}")
            keys.extend(match)
    failed = 0
    for k in keys:
        res = run_suite(k, seed=_seed(args))
        print(res.line())
        failed += not res.ok
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_surgery(args):
    p = _load_profile(args.input)
    if args.op == "add-loop":
        omega = _load_profile(args.omega) if args.omega else None
        out = add_loops(p, SurgerySpec(args.t0, args.eps, omega))
    elif args.op == "rr":
        params = RRParams(args.eps, args.delta)
        pair, cell = hat_pair(p, params)
        out = pair.right()
        out = CurvatureProfile(out.grid, out.v, out.kappa, law=out.law, breakpoints=out.breakpoints,
                               meta=dict(p.meta, surgery="relax_reflect", epsilon=args.eps, delta=args.delta))
        print(f"pair final spin {spin_label(pair.final_spin())}")
        print(cell.rep_so)
        print(f"lifted cell of {spin_label(cell.lift)}")
    else:
        if p.dim != 3:
            raise PreconditionError("sharp expects a curve on S^3 (it works on its decomposition)")
        pair = sharp(decompose3(p), args.t0, args.eps)
        out = compose3(pair)
        meta = {k: v for k, v in pair.meta.items() if k != "nu"}
        out = CurvatureProfile(out.grid, *out.arrays(), law=out.law, breakpoints=out.breakpoints, meta=meta)
    z = final_spin(out)
    write_curve(args.out, out, {"final_spin": z})
    print(f"wrote {args.op} result to {args.out}; final spin frame {spin_label(z)}")
    return EXIT_OK


def cmd_plot_data(args):
    cf = read_curve(args.input)
    if cf.kind == "profile":
        prof = cf.to_profile()
        curve, _ = curve_from_profile(prof)
    else:
        curve = cf.to_samples()
        prof = curvature_torsion(curve)
    dim = curve.dim
    header = ["t"] + [f"x{k}" for k in range(1, dim + 2)] + ["v", "kappa"] + (["tau"] if dim == 3 else [])
    cols = [curve.t] + [curve.points[:, k] for k in range(dim + 1)] + list(prof.arrays())
    try:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in np.stack(cols, axis=1):
                w.writerow([format(x, ".17g") for x in row])
    except OSError as exc:
        raise CurveFileError(f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {len(curve.t)} rows to {args.out}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="spincurve", description="Locally convex curves on S^2 and S^3.")
    ap.add_argument("--seed", type=int, default=None,
                    help="seed for Monte-Carlo predicates (fallback: $SPINCURVE_SEED, then 0)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an example curve")
    g.add_argument("--family", required=True, choices=["xi", "sigma", "gamma11", "gamma12", "omega3"])
    g.add_argument("--c", type=float, default=np.pi, help="circle length for sigma")
    g.add_argument("--turns", type=float, default=1.0, help="number of turns for sigma")
    g.add_argument("--reflect", action="store_true", help="reflected circle (negative curvature)")
    g.add_argument("--coef", type=float, nargs="+", help="xi coefficients c_i")
    g.add_argument("--freq", type=float, nargs="+", help="xi frequencies a_i")
    g.add_argument("--kind", choices=["profile", "samples"], default=None,
                   help="default: samples for xi and omega3 (coordinate formulas), profile otherwise")
    g.add_argument("--n", type=int, default=1024)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decompose", help="split an S^3 curve into its left and right S^2 curves")
    d.add_argument("input")
    d.add_argument("--out-left", required=True)
    d.add_argument("--out-right", required=True)
    d.set_defaults(func=cmd_decompose)

    c = sub.add_parser("compose", help="join two S^2 curves with a shared speed")
    c.add_argument("left")
    c.add_argument("right")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_compose)

    k = sub.add_parser("classify", help="Bruhat cell of a matrix or a spin element")
    src = k.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="text file with a 3x3 or 4x4 special orthogonal matrix")
    src.add_argument("--spin", help="text file with 4 (Spin3) or 8 (Spin4) numbers")
    src.add_argument("--relaxed-test", type=float, nargs=2, metavar=("EPS", "DELTA"),
                     help="the final frame (1, exp(-eps h_r)) of the relaxed test pair")
    k.set_defaults(func=cmd_classify)

    ch = sub.add_parser("check", help="run verification suites")
    ch.add_argument("suites", nargs="*", help="suite numbers 1-10 or name fragments")
    ch.add_argument("--all", action="store_true")
    ch.set_defaults(func=cmd_check)

    s = sub.add_parser("surgery", help="add loops, relax-reflect, or the sharp operation")
    s.add_argument("op", choices=["add-loop", "rr", "sharp"])
    s.add_argument("input")
    s.add_argument("--out", required=True)
    s.add_argument("--t0", type=float, default=0.5)
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--omega", help="curve file of the inserted closed curve (add-loop)")
    s.set_defaults(func=cmd_surgery)

    pd = sub.add_parser("plot-data", help="CSV of points and profile for external plotting")
    pd.add_argument("input")
    pd.add_argument("--out", required=True)
    pd.set_defaults(func=cmd_plot_data)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "eps", "unset") is None:
        args.eps = 0.1 if args.op == "rr" else DEFAULT_EPS
    try:
        return args.func(args)
    except CurveFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PreconditionError as exc:
        t = getattr(exc, "t", None)
        where = f" (t = {t:.6g})" if t is not None and "t =" not in str(exc) else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
