"""Benchmark Hamiltonian systems and backward-error diagnostics.

Vector-field convention (shared with the integrator): the field of an
energy function H is X_H = J grad H with J = make_standard_J(n). States are
laid out as z = (q_1..q_n, p_1..p_n).
"""

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm, logm

from .errors import DomainError, StructureError
from .integrator import integrate, linear_one_step_matrix
from .linalg import SymplecticMap, cayley, make_standard_J, max_abs

#: Below this separation the Kepler system refuses to evaluate.
KEPLER_COLLISION_RADIUS = 1e-8


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    """A Hamiltonian system on R^{2n} given by callables.

    `field` must equal J grad H pointwise; `exact_flow(t, z)`, when present,
    is the exact time-t flow map.
    """

    name: str
    n: int
    energy: Callable
    gradient: Callable
    field: Callable
    exact_flow: Optional[Callable] = None

    @property
    def dim(self):
        return 2 * self.n


@dataclass(frozen=True, eq=False)
class QuadraticSystem(HamiltonianSystem):
    """Quadratic energy H(z) = z^T C z / 2 with linear field z -> J C z."""

    C: np.ndarray = None
    B: np.ndarray = None


def make_harmonic_oscillator(n=1):
    """n-mode oscillator: H = |z|^2 / 2, exact flow is a rotation in each plane."""
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    J = make_standard_J(n)

    def energy(z):
        z = np.asarray(z, dtype=float)
        return 0.5 * float(z @ z)

    def gradient(z):
        return np.array(z, dtype=float)

    def fieldfn(z):
        return J @ np.asarray(z, dtype=float)

    def exact_flow(t, z):
        z = np.asarray(z, dtype=float)
        return math.cos(t) * z + math.sin(t) * (J @ z)

    return HamiltonianSystem(name="oscillator", n=n, energy=energy,
                             gradient=gradient, field=fieldfn,
                             exact_flow=exact_flow)


def make_pendulum():
    """Planar pendulum: H(q, p) = p^2 / 2 - cos q. No closed-form flow."""

    def energy(z):
        q, p = z
        return 0.5 * p * p - math.cos(q)

    def gradient(z):
        q, p = z
        return np.array([math.sin(q), p])

    def fieldfn(z):
        q, p = z
        return np.array([-p, math.sin(q)])

    return HamiltonianSystem(name="pendulum", n=1, energy=energy,
                             gradient=gradient, field=fieldfn)


def make_kepler():
    """Planar Kepler problem: H = |p|^2 / 2 - 1/|q| on R^4.

    Evaluations raise DomainError once |q| drops below the collision radius;
    trajectories that get that close fail loudly instead of continuing.
    """

    def _split(z):
        z = np.asarray(z, dtype=float)
        q, p = z[:2], z[2:]
        r = float(np.linalg.norm(q))
        if r < KEPLER_COLLISION_RADIUS:
            raise DomainError(f"Kepler collision: |q| = {r:.3e} < "
                              f"{KEPLER_COLLISION_RADIUS:.1e}")
        return q, p, r

    def energy(z):
        q, p, r = _split(z)
        return 0.5 * float(p @ p) - 1.0 / r

    def gradient(z):
        q, p, r = _split(z)
        return np.concatenate([q / r ** 3, p])

    def fieldfn(z):
        q, p, r = _split(z)
        return np.concatenate([-p, q / r ** 3])

    return HamiltonianSystem(name="kepler", n=2, energy=energy,
                             gradient=gradient, field=fieldfn)


def make_quadratic(C, name="quadratic"):
    """Quadratic system for a symmetric coefficient matrix C.

    The exact flow is the matrix exponential of t J C applied to the state.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] % 2 != 0:
        raise ValueError(f"C must be square with even dimension, got {C.shape}")
    res = max_abs(C - C.T)
    if res > 1e-12:
        raise StructureError(f"C is not symmetric: ||C - C^T|| = {res:.3e}")
    n = C.shape[0] // 2
    B = make_standard_J(n) @ C

    def energy(z):
        z = np.asarray(z, dtype=float)
        return 0.5 * float(z @ C @ z)

    def gradient(z):
        return C @ np.asarray(z, dtype=float)

    def fieldfn(z):
        return B @ np.asarray(z, dtype=float)

    def exact_flow(t, z):
        return expm(t * B) @ np.asarray(z, dtype=float)

    return QuadraticSystem(name=name, n=n, energy=energy, gradient=gradient,
                           field=fieldfn, exact_flow=exact_flow, C=C, B=B)


def surrounding_hamiltonian(system, phi):
    """Transported energy z -> H(phi^{-1} z) for a symplectic map phi.

    With phi the identity this is the original energy. In backward error
    analysis this is the energy the one-step method follows exactly in the
    linear case.
    """
    if not isinstance(phi, SymplecticMap):
        phi = SymplecticMap(np.asarray(phi, dtype=float))
    inv = phi.inverse().matrix

    def hhat(z):
        return system.energy(inv @ np.asarray(z, dtype=float))

    return hhat


@dataclass
class BeaReport:
    """Backward-error diagnostics of one integration run.

    Drifts are measured along the trajectory relative to the initial value;
    `fitted_quadratic_residual` (quadratic systems only) is the max-norm gap
    between the numerical one-step matrix and the exact time-tau flow of the
    quadratic energy fitted to it via the matrix logarithm.
    """

    system: str
    tau: float
    steps: int
    hmat_norm: float
    h_drift_max: float
    hhat_drift_max: float
    fitted_quadratic_residual: Optional[float] = None

    def to_dict(self):
        out = {
            "system": self.system,
            "tau": self.tau,
            "steps": self.steps,
            "Hmat_norm": self.hmat_norm,
            "H_drift_max": self.h_drift_max,
            "Hhat_drift_max": self.hhat_drift_max,
        }
        if self.fitted_quadratic_residual is not None:
            out["fitted_quadratic_residual"] = self.fitted_quadratic_residual
        return out

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


def fit_surrounding_quadratic(B, Hmat, tau):
    """Fit a quadratic energy whose exact flow matches the one-step matrix.

    Returns (C_hat, residual): the symmetric coefficient matrix C_hat with
    expm(tau J C_hat) closest to the one-step matrix in the log sense, and
    the max-norm of the remaining gap. Since the one-step matrix is
    symplectic, the gap is at roundoff level whenever the principal matrix
    logarithm exists (always, for small tau).
    """
    M = linear_one_step_matrix(B, Hmat, tau)
    J = make_standard_J(M.shape[0] // 2)
    L = logm(M)
    L = np.real(L)
    C_hat = -J @ L / tau
    C_hat = 0.5 * (C_hat + C_hat.T)
    residual = max_abs(expm(tau * (J @ C_hat)) - M)
    return C_hat, residual


def bea_report(system, cfg, z0):
    """Run the integrator and measure energy drift against the transported energy.

    The comparison map is phi = cayley(tau * Hmat); with Hmat = 0 the
    transported energy coincides with H and both drift figures agree.
    """
    traj = integrate(system, cfg, z0)
    h0 = traj.energies[0]
    hhat0 = traj.surrounding_energies[0]
    h_drift = max_abs(traj.energies - h0)
    hhat_drift = max_abs(traj.surrounding_energies - hhat0)
    fitted = None
    if isinstance(system, QuadraticSystem):
        Hmat = cfg.Hmat if cfg.Hmat is not None else np.zeros_like(system.B)
        _, fitted = fit_surrounding_quadratic(system.B, Hmat, cfg.tau)
    return BeaReport(system=system.name, tau=cfg.tau, steps=cfg.steps,
                     hmat_norm=max_abs(cfg.Hmat) if cfg.Hmat is not None else 0.0,
                     h_drift_max=h_drift, hhat_drift_max=hhat_drift,
                     fitted_quadratic_residual=fitted)
