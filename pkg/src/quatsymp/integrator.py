"""Implicit one-step integrator driven by a fixed Hamiltonian tuning matrix.

One step of size tau solves

    z1 = z0 + tau * field(zbar),
    zbar = (z0 + z1) / 2 + (tau / 2) * Hmat @ (z1 - z0),

for z1. With Hmat = 0 this is the classical implicit midpoint rule; for any
Hamiltonian Hmat the step map is symplectic. The implicit equation is solved
by fixed-point iteration with a Newton fallback (finite-difference Jacobian)
when the iteration stalls.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConditioningError,
    ConvergenceError,
    DomainError,
    ExceptionalMatrixError,
    StructureError,
)
from .linalg import (
    COND_LIMIT,
    _as_square_even,
    _as_vector,
    cayley,
    hamiltonian_residual,
    is_non_exceptional,
    make_standard_J,
    max_abs,
)

_SOLVERS = ("fixed_point", "newton")


@dataclass(frozen=True, eq=False)
class IntegratorConfig:
    """Run parameters for the one-step method.

    Hmat, when present, must be Hamiltonian to 1e-12 with tau * Hmat
    non-exceptional. tau may be negative (time-reversal experiments); the
    CLI restricts itself to tau > 0.
    """

    tau: float
    steps: int = 0
    Hmat: np.ndarray = None
    solver: str = "fixed_point"
    solver_tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau == 0.0:
            raise ValueError(f"tau must be a nonzero finite scalar, got {self.tau}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError(f"steps must be a nonnegative integer, got {self.steps}")
        if self.solver not in _SOLVERS:
            raise ValueError(f"solver must be one of {_SOLVERS}, got {self.solver!r}")
        if not (self.solver_tol >= 0.0):
            raise ValueError(f"solver_tol must be nonnegative, got {self.solver_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if self.Hmat is not None:
            H = _as_square_even(self.Hmat, "Hmat")
            J = make_standard_J(H.shape[0] // 2)
            res = hamiltonian_residual(H, J)
            if res > 1e-12:
                raise StructureError(
                    f"Hmat is not Hamiltonian: ||H^T J + J H|| = {res:.3e}")
            if not is_non_exceptional(self.tau * H):
                raise ExceptionalMatrixError("tau * Hmat is exceptional")
            object.__setattr__(self, "Hmat", H)

    def with_updates(self, **kwargs):
        return replace(self, **kwargs)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniform-grid trajectory with per-step solver diagnostics.

    states has shape (steps + 1, 2n); iterations and residuals are zero for
    the initial row. surrounding_energies is the energy transported by
    cayley(tau * Hmat) evaluated along the trajectory (equals energies when
    Hmat = 0).
    """

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    surrounding_energies: np.ndarray
    iterations: np.ndarray
    residuals: np.ndarray

    @property
    def steps(self):
        return self.states.shape[0] - 1


# ---------------------------------------------------------------------------
# the implicit solve


def _stagnation_floor(z):
    return 8.0 * np.finfo(float).eps * (1.0 + max_abs(z))


def _fd_jacobian(fn, z, scale):
    """Central-difference Jacobian of fn at z."""
    dim = z.size
    eps = np.sqrt(np.finfo(float).eps) * (1.0 + scale)
    D = np.empty((dim, dim))
    for i in range(dim):
        zp = z.copy()
        zm = z.copy()
        zp[i] += eps
        zm[i] -= eps
        D[:, i] = (fn(zp) - fn(zm)) / (2.0 * eps)
    return D


def _solve_step(system, tau, Hmat, z0, solver, tol, max_iter):
    """Solve the implicit step equation; returns (z1, iterations, residual).

    Convergence means the fixed-point defect ||g(z) - z|| dropped below tol,
    or below the floating-point stagnation floor (the iterate stopped
    moving, so no further improvement is possible).
    """

    def g(z):
        zbar = 0.5 * (z0 + z)
        if Hmat is not None:
            zbar = zbar + 0.5 * tau * (Hmat @ (z - z0))
        return z0 + tau * system.field(zbar)

    iters = 0
    z = z0.copy()
    res = np.inf

    if solver == "fixed_point":
        res_prev = np.inf
        while iters < max_iter:
            z_new = g(z)
            res = max_abs(z_new - z)
            iters += 1
            z = z_new
            if res <= tol or res <= _stagnation_floor(z):
                return z, iters, res
            if res > 0.9 * res_prev:
                break  # stalled; fall through to Newton
            res_prev = res
        if iters >= max_iter:
            raise ConvergenceError(
                f"fixed-point iteration did not converge in {max_iter} "
                f"iterations (residual {res:.3e})", residual=res)

    scale = max_abs(z0)
    while iters < max_iter:
        gz = g(z)
        res = max_abs(gz - z)
        if res <= tol or res <= _stagnation_floor(z):
            return z, iters, res
        iters += 1
        D = _fd_jacobian(g, z, scale)
        try:
            dz = np.linalg.solve(D - np.eye(z.size), z - gz)
        except np.linalg.LinAlgError as err:
            raise ConvergenceError(
                f"singular Newton system (residual {res:.3e})",
                residual=res) from err
        if max_abs(dz) <= _stagnation_floor(z):
            return z + dz, iters, res
        z = z + dz
    raise ConvergenceError(
        f"solver did not converge in {max_iter} iterations "
        f"(residual {res:.3e})", residual=res)


def step(system, cfg, z0):
    """Advance one step of size cfg.tau from z0; returns z1.

    Raises ConvergenceError when the implicit solve fails and propagates
    DomainError from the system callbacks.
    """
    z0 = _as_vector(z0, "z0")
    if z0.size != 2 * system.n:
        raise ValueError(f"state dimension {z0.size} != system dimension "
                         f"{2 * system.n}")
    if cfg.Hmat is not None and cfg.Hmat.shape[0] != z0.size:
        raise ValueError(f"Hmat dimension {cfg.Hmat.shape[0]} != state "
                         f"dimension {z0.size}")
    z1, _, _ = _solve_step(system, cfg.tau, cfg.Hmat, z0,
                           cfg.solver, cfg.solver_tol, cfg.max_iter)
    return z1


def integrate(system, cfg, z0):
    """Apply `step` cfg.steps times, recording diagnostics per state.

    Deterministic for fixed inputs. Solver and domain errors are re-raised
    with the failing step index attached.
    """
    z0 = _as_vector(z0, "z0")
    if z0.size != 2 * system.n:
        raise ValueError(f"state dimension {z0.size} != system dimension "
                         f"{2 * system.n}")
    if cfg.Hmat is not None and cfg.Hmat.shape[0] != z0.size:
        raise ValueError(f"Hmat dimension {cfg.Hmat.shape[0]} != state "
                         f"dimension {z0.size}")

    if cfg.Hmat is None or max_abs(cfg.Hmat) == 0.0:
        transported = system.energy
    else:
        phi_inv = cayley(cfg.tau * cfg.Hmat).inverse().matrix
        transported = lambda z: system.energy(phi_inv @ z)  # noqa: E731

    steps = int(cfg.steps)
    dim = z0.size
    times = cfg.tau * np.arange(steps + 1)
    states = np.empty((steps + 1, dim))
    energies = np.empty(steps + 1)
    surrounding = np.empty(steps + 1)
    iterations = np.zeros(steps + 1, dtype=int)
    residuals = np.zeros(steps + 1)

    states[0] = z0
    energies[0] = system.energy(z0)
    surrounding[0] = transported(z0)
    z = z0
    for k in range(1, steps + 1):
        try:
            z, iters, res = _solve_step(system, cfg.tau, cfg.Hmat, z,
                                        cfg.solver, cfg.solver_tol, cfg.max_iter)
        except ConvergenceError as err:
            raise ConvergenceError(f"step {k}: {err}", residual=err.residual,
                                   step_index=k) from err
        except DomainError as err:
            raise DomainError(f"step {k}: {err}", step_index=k) from err
        states[k] = z
        energies[k] = system.energy(z)
        surrounding[k] = transported(z)
        iterations[k] = iters
        residuals[k] = res
    return Trajectory(times=times, states=states, energies=energies,
                      surrounding_energies=surrounding, iterations=iterations,
                      residuals=residuals)


# ---------------------------------------------------------------------------
# linear specialization and diagnostics


def linear_one_step_matrix(B, Hmat, tau):
    """One-step matrix of the method on a linear field z' = B z.

    M = (I - (tau/2) B - (tau^2/2) B Hmat)^{-1} (I + (tau/2) B - (tau^2/2) B Hmat)

    For B and Hmat Hamiltonian, M is symplectic. Raises ConditioningError
    when the solve is numerically singular.
    """
    B = _as_square_even(B, "B")
    if Hmat is None:
        BH = np.zeros_like(B)
    else:
        Hmat = _as_square_even(Hmat, "Hmat")
        if Hmat.shape != B.shape:
            raise ValueError(f"B and Hmat differ in shape: {B.shape} vs {Hmat.shape}")
        BH = B @ Hmat
    eye = np.eye(B.shape[0])
    lhs = eye - 0.5 * tau * B - 0.5 * tau ** 2 * BH
    rhs = eye + 0.5 * tau * B - 0.5 * tau ** 2 * BH
    cond = np.linalg.cond(lhs, 1)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ConditioningError(
            f"one-step solve has condition estimate {cond:.3e} > {COND_LIMIT:.1e}")
    return np.linalg.solve(lhs, rhs)


def symplecticity_defect(system, cfg, z, fd_eps):
    """Max-norm of D^T J D - J for the finite-difference one-step Jacobian D.

    D is built column-by-column from central differences of `step` with
    per-coordinate perturbation fd_eps.
    """
    z = _as_vector(z, "z")
    dim = z.size
    D = np.empty((dim, dim))
    for i in range(dim):
        zp = z.copy()
        zm = z.copy()
        zp[i] += fd_eps
        zm[i] -= fd_eps
        D[:, i] = (step(system, cfg, zp) - step(system, cfg, zm)) / (2.0 * fd_eps)
    J = make_standard_J(dim // 2)
    return max_abs(D.T @ J @ D - J)


@dataclass(frozen=True, eq=False)
class ConvergenceStudy:
    """(tau, endpoint error) pairs plus the fitted log-log slope."""

    points: list
    slope: float


def convergence_study(system, cfg_base, z0, T, levels):
    """Halve tau `levels` times from cfg_base.tau, integrating to time T.

    T must be an integer multiple of every tau in the ladder. The reference
    endpoint is the exact flow when the system has one; otherwise the same
    method at tau_min / 100 with Hmat = 0 and solver_tol = 1e-14. Errors are
    max-norm endpoint differences; the slope is a least-squares fit of
    log(error) against log(tau).
    """
    if levels < 1 or int(levels) != levels:
        raise ValueError(f"levels must be a positive integer, got {levels}")
    z0 = _as_vector(z0, "z0")
    taus = [cfg_base.tau / 2 ** k for k in range(int(levels) + 1)]
    counts = []
    for tau in taus:
        count = T / tau
        if abs(count - round(count)) > 1e-9 * max(1.0, abs(count)):
            raise ValueError(f"T = {T} is not an integer multiple of tau = {tau}")
        counts.append(int(round(count)))

    if system.exact_flow is not None:
        z_ref = system.exact_flow(T, z0)
    else:
        tau_ref = taus[-1] / 100.0
        cfg_ref = IntegratorConfig(tau=tau_ref, steps=int(round(T / tau_ref)),
                                   Hmat=None, solver=cfg_base.solver,
                                   solver_tol=1e-14, max_iter=cfg_base.max_iter)
        z_ref = integrate(system, cfg_ref, z0).states[-1]

    points = []
    for tau, count in zip(taus, counts):
        cfg = cfg_base.with_updates(tau=tau, steps=count)
        z_end = integrate(system, cfg, z0).states[-1]
        points.append((tau, max_abs(z_end - z_ref)))
    log_tau = np.log([p[0] for p in points])
    log_err = np.log([max(p[1], 1e-300) for p in points])
    slope = float(np.polyfit(log_tau, log_err, 1)[0])
    return ConvergenceStudy(points=points, slope=slope)


# ---------------------------------------------------------------------------
# trajectory file format


def write_trajectory_csv(traj, path, meta=None):
    """Write a trajectory as CSV with 17-significant-digit floats.

    Metadata (resolved run configuration) is echoed as '# key: json' comment
    lines above the header row `step,t,z1,...,z2n,H,Hhat,iters,residual`.
    """
    dim = traj.states.shape[1]
    cols = ["step", "t"] + [f"z{i + 1}" for i in range(dim)] + \
        ["H", "Hhat", "iters", "residual"]
    fmt = lambda x: format(float(x), ".17g")  # noqa: E731
    with open(path, "w", encoding="ascii") as fh:
        if meta:
            fh.write(f"# config: {json.dumps(meta, sort_keys=True)}\n")
        fh.write(",".join(cols) + "\n")
        for k in range(traj.states.shape[0]):
            row = [str(k), fmt(traj.times[k])]
            row += [fmt(x) for x in traj.states[k]]
            row += [fmt(traj.energies[k]), fmt(traj.surrounding_energies[k]),
                    str(int(traj.iterations[k])), fmt(traj.residuals[k])]
            fh.write(",".join(row) + "\n")


def read_trajectory_csv(path):
    """Read a trajectory CSV written by `write_trajectory_csv`.

    Returns (Trajectory, meta_dict); meta is {} when no config comment is
    present.
    """
    meta = {}
    rows = []
    header = None
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("config:"):
                    meta = json.loads(body[len("config:"):].strip())
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: missing header row")
    dim = len(header) - 6
    if dim < 2 or header[2] != "z1":
        raise ValueError(f"{path}: unexpected header {header!r}")
    times = np.array([float(r[1]) for r in rows])
    states = np.array([[float(x) for x in r[2:2 + dim]] for r in rows])
    energies = np.array([float(r[2 + dim]) for r in rows])
    surrounding = np.array([float(r[3 + dim]) for r in rows])
    iterations = np.array([int(r[4 + dim]) for r in rows], dtype=int)
    residuals = np.array([float(r[5 + dim]) for r in rows])
    traj = Trajectory(times=times, states=states, energies=energies,
                      surrounding_energies=surrounding, iterations=iterations,
                      residuals=residuals)
    return traj, meta
