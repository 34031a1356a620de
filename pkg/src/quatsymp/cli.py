"""Command-line front end.

Subcommands: `verify` (structure property suites), `map` (extract a
symplectic map from an (R, S) matrix pair), `integrate` (trajectory CSV),
`converge` (step-size study), `bea` (backward-error report).

Exit codes: 0 success, 1 failed checks or failed integration/construction,
2 usage or input errors. Every output file echoes the resolved run
configuration, including the seed and conventions version.
"""

import argparse
import json
import sys

import numpy as np

from .errors import QuatsympError
from .integrator import (
    IntegratorConfig,
    convergence_study,
    integrate,
    write_trajectory_csv,
)
from .linalg import (
    CONVENTIONS_VERSION,
    make_standard_J,
    max_abs,
    read_matrix,
    symplectic_residual,
    write_matrix,
)
from .product import build_liouville_spec, extract_map, perp_identity_report, \
    projection_residual
from .sampling import random_hamiltonian
from .systems import (
    bea_report,
    make_harmonic_oscillator,
    make_kepler,
    make_pendulum,
    make_quadratic,
)
from .verify import run_verification

SYSTEM_NAMES = ("oscillator", "pendulum", "kepler", "quadratic")


def _make_system(args):
    name = args.system
    if name == "oscillator":
        return make_harmonic_oscillator(getattr(args, "dof", 1) or 1)
    if name == "pendulum":
        return make_pendulum()
    if name == "kepler":
        return make_kepler()
    if name == "quadratic":
        c_file = getattr(args, "c_file", None)
        if not c_file:
            raise ValueError("--system quadratic requires --c-file")
        return make_quadratic(read_matrix(c_file))
    raise ValueError(f"unknown system {name!r}; choose from {SYSTEM_NAMES}")


def _parse_z0(text, dim):
    try:
        z0 = np.array([float(tok) for tok in text.split(",")])
    except ValueError:
        raise ValueError(f"could not parse --z0 {text!r} as comma-separated "
                         "decimals") from None
    if z0.size != dim:
        raise ValueError(f"--z0 has {z0.size} components, system needs {dim}")
    return z0


def _parse_hmat(spec, dim, seed):
    """--hmat accepts 'zero', a matrix file path, or 'random:<norm>'."""
    if spec is None or spec == "zero":
        return None
    if spec.startswith("random:"):
        norm = float(spec[len("random:"):])
        if norm <= 0:
            raise ValueError(f"--hmat random:<norm> needs norm > 0, got {norm}")
        rng = np.random.default_rng(seed)
        return random_hamiltonian(dim // 2, rng, scale=norm, det_floor=1e-8)
    return read_matrix(spec)


def _check_tau(tau):
    if not (tau > 0):
        raise ValueError(f"tau must be positive, got {tau}")


def _base_meta(args, **extra):
    meta = {"command": args.command, "seed": int(getattr(args, "seed", 0)),
            "conventions_version": CONVENTIONS_VERSION}
    meta.update(extra)
    return meta


def _run_meta(args):
    return _base_meta(
        args, system=args.system, dof=getattr(args, "dof", None),
        z0=args.z0, hmat=args.hmat, solver=args.solver,
        solver_tol=args.solver_tol, max_iter=args.max_iter)


# ---------------------------------------------------------------------------
# commands


def cmd_verify(args, triple=None):
    report = run_verification(args.n, args.trials, args.seed, tol=args.tol,
                              triple=triple)
    sys.stdout.write(report.to_text())
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(report.to_json() + "\n")
    return 0 if report.passed else 1


def cmd_map(args):
    R = read_matrix(args.r_file)
    S = read_matrix(args.s_file)
    smap = extract_map(R, S)
    write_matrix(args.out, smap.matrix)

    rng = np.random.default_rng(args.seed)
    spec = build_liouville_spec(R, S)
    proj = 0.0
    for _ in range(args.probes):
        x = rng.standard_normal(2 * smap.n)
        proj = max(proj, projection_residual(spec, x, smap.apply(x)))
    x = rng.standard_normal(2 * smap.n)
    direct, inverse = perp_identity_report(R, S, x)
    sidecar = {
        "config": _base_meta(args, r_file=args.r_file, s_file=args.s_file,
                             probes=args.probes),
        "symplecticity_residual": symplectic_residual(
            smap.matrix, make_standard_J(smap.n)),
        "projection_residual_max": proj,
        "perp_residual_direct": direct,
        "perp_residual_inverse": inverse,
        "note": ("perp residuals compare the rotated image X_perp = J X "
                 "against S x_perp (direct) and S^{-1} x_perp (inverse); "
                 "only the inverse form vanishes for these maps, since "
                 "J S = S^{-1} J when the generator is symmetric Hamiltonian"),
    }
    sidecar_path = args.sidecar or args.out + ".json"
    with open(sidecar_path, "w", encoding="ascii") as fh:
        fh.write(json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {args.out} and {sidecar_path}")
    return 0


def cmd_integrate(args):
    _check_tau(args.tau)
    system = _make_system(args)
    z0 = _parse_z0(args.z0, system.dim)
    Hmat = _parse_hmat(args.hmat, system.dim, args.seed)
    cfg = IntegratorConfig(tau=args.tau, steps=args.steps, Hmat=Hmat,
                           solver=args.solver, solver_tol=args.solver_tol,
                           max_iter=args.max_iter)
    traj = integrate(system, cfg, z0)
    meta = _run_meta(args)
    meta.update(tau=args.tau, steps=args.steps)
    write_trajectory_csv(traj, args.out, meta)
    print(f"wrote {args.out} ({traj.steps} steps)")
    return 0


def cmd_converge(args):
    _check_tau(args.tau_max)
    system = _make_system(args)
    z0 = _parse_z0(args.z0, system.dim)
    Hmat = _parse_hmat(args.hmat, system.dim, args.seed)
    cfg_base = IntegratorConfig(tau=args.tau_max, steps=1, Hmat=Hmat,
                                solver=args.solver, solver_tol=args.solver_tol,
                                max_iter=args.max_iter)
    study = convergence_study(system, cfg_base, z0, args.T, args.levels)
    meta = _run_meta(args)
    meta.update(tau_max=args.tau_max, T=args.T, levels=args.levels)
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write(f"# config: {json.dumps(meta, sort_keys=True)}\n")
        fh.write("tau,error\n")
        for tau, err in study.points:
            fh.write(f"{tau:.17g},{err:.17g}\n")
    if args.json:
        payload = {"config": meta, "slope": study.slope,
                   "points": [{"tau": t, "error": e} for t, e in study.points]}
        with open(args.json, "w", encoding="ascii") as fh:
            fh.write(json.dumps(payload, indent=2) + "\n")
    print(f"observed order: {study.slope:.3f}")
    return 0


def cmd_bea(args):
    _check_tau(args.tau)
    system = _make_system(args)
    z0 = _parse_z0(args.z0, system.dim)
    Hmat = _parse_hmat(args.hmat, system.dim, args.seed)
    cfg = IntegratorConfig(tau=args.tau, steps=args.steps, Hmat=Hmat,
                           solver=args.solver, solver_tol=args.solver_tol,
                           max_iter=args.max_iter)
    report = bea_report(system, cfg, z0)
    meta = _run_meta(args)
    meta.update(tau=args.tau, steps=args.steps)
    payload = report.to_dict()
    payload["config"] = meta
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")
    print(f"H drift {report.h_drift_max:.3e}, transported-H drift "
          f"{report.hhat_drift_max:.3e}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_run_arguments(p, tau_flag=True):
    p.add_argument("--system", required=True, help="oscillator | pendulum | "
                   "kepler | quadratic")
    p.add_argument("--dof", type=int, default=1,
                   help="degrees of freedom (oscillator only)")
    p.add_argument("--c-file", default=None,
                   help="coefficient matrix file for --system quadratic")
    p.add_argument("--z0", required=True,
                   help="initial state, comma-separated decimals")
    p.add_argument("--hmat", default="zero",
                   help="'zero', a matrix file, or 'random:<norm>'")
    p.add_argument("--solver", default="fixed_point",
                   choices=["fixed_point", "newton"])
    p.add_argument("--solver-tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="quatsymp",
        description="Symplectic maps from doubled-phase-space structure, and "
                    "the associated implicit symplectic integrator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the structure property suites")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10,
                   help="tolerance for the solve-limited map checks")
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("map", help="extract the symplectic map of an (R, S) pair")
    p.add_argument("--r-file", required=True)
    p.add_argument("--s-file", required=True)
    p.add_argument("--out", required=True, help="output matrix file")
    p.add_argument("--sidecar", default=None,
                   help="residuals JSON path (default: <out>.json)")
    p.add_argument("--probes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("integrate", help="run the integrator, write a CSV")
    _add_run_arguments(p)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("converge", help="empirical order study")
    _add_run_arguments(p)
    p.add_argument("--tau-max", type=float, required=True)
    p.add_argument("--levels", type=int, required=True,
                   help="number of halvings of tau-max")
    p.add_argument("--T", type=float, required=True,
                   help="fixed final time (integer multiple of every tau)")
    p.add_argument("--out", required=True, help="tau,error CSV path")
    p.add_argument("--json", default=None, help="slope + points JSON path")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("bea", help="backward-error report")
    _add_run_arguments(p)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_bea)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except QuatsympError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
