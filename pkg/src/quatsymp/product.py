"""Quaternionic structure on the doubled phase space R^{4n}.

The doubled space carries three antisymmetric structure matrices I4n, J4n,
K4n satisfying the quaternion relations. Each doubles as a symplectic form
matrix under the Euclidean pairing, ``omega_C(u, v) = u^T C v``. A matrix
pair (R Hamiltonian, S symmetric) induces a linear vector field on the
doubled space that is simultaneously Hamiltonian for the I- and J-forms;
shifting it by half the identity gives a Liouville field whose kernel
equation cuts out a linear symplectic map, realized as the Cayley transform
of H = R + S.

Exterior-derivative convention used throughout: for the linear 1-form
``theta(x)(u) = (W x)^T Omega u``, the form matrix of ``d theta`` is
``W^T Omega + Omega W`` (unit-tested against a finite-difference stencil).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import StructureError
from .linalg import (
    SymplecticMap,
    _as_square_even,
    _as_vector,
    cayley,
    hamiltonian_residual,
    make_standard_J,
    max_abs,
)

EXACT_TOL = 1e-12


# ---------------------------------------------------------------------------
# verification records


@dataclass
class CheckRecord:
    """One named numerical check: a residual compared against a tolerance.

    `comparison` gives the pass rule: "<=" (residual at most tolerance),
    ">" / ">=" (lower bounds, e.g. nondegeneracy margins), or "report"
    (informational, never fails).
    """

    name: str
    residual: float
    tolerance: float
    comparison: str = "<="

    @property
    def passed(self):
        if self.comparison == "<=":
            return self.residual <= self.tolerance
        if self.comparison == ">":
            return self.residual > self.tolerance
        if self.comparison == ">=":
            return self.residual >= self.tolerance
        if self.comparison == "report":
            return True
        raise ValueError(f"unknown comparison {self.comparison!r}")

    def to_dict(self):
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "passed": self.passed,
        }


@dataclass
class VerificationReport:
    """A batch of CheckRecords with optional run metadata.

    Serializes to a one-line-per-check text table and to JSON with the same
    fields (name, residual, tolerance, comparison, passed).
    """

    checks: list
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failed_checks(self):
        return [c for c in self.checks if not c.passed]

    def to_text(self):
        lines = []
        for key, val in self.meta.items():
            lines.append(f"# {key}: {val}")
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name:<48} residual {c.residual: .6e}  "
                         f"{c.comparison} {c.tolerance:.1e}")
        lines.append(f"{'PASS' if self.passed else 'FAIL'}  overall "
                     f"({len(self.checks)} checks)")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "meta": dict(self.meta),
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


# ---------------------------------------------------------------------------
# the structure matrices


@dataclass(frozen=True, eq=False)
class QuaternionicTriple:
    """The three 4n x 4n structure matrices on the doubled space."""

    n: int
    I4n: np.ndarray
    J4n: np.ndarray
    K4n: np.ndarray

    def forms(self):
        """The three form matrices, keyed by letter."""
        return {"I": self.I4n, "J": self.J4n, "K": self.K4n}


def make_triple(n):
    """Build the structure matrices for n degrees of freedom per factor.

    With J2n the standard 2n x 2n form:

        I4n = [[0, -Id], [Id, 0]]      (the standard form at size 4n)
        J4n = [[J2n, 0], [0, J2n^T]]   (difference form of the two factors)
        K4n = [[0, J2n], [J2n, 0]]

    All entries are 0 or +-1, so the quaternion relations hold exactly in
    floating point.
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    J2n = make_standard_J(n)
    Z = np.zeros((2 * n, 2 * n))
    eye = np.eye(2 * n)
    I4n = np.block([[Z, -eye], [eye, Z]])
    J4n = np.block([[J2n, Z], [Z, J2n.T]])
    K4n = np.block([[Z, J2n], [J2n, Z]])
    return QuaternionicTriple(n=n, I4n=I4n, J4n=J4n, K4n=K4n)


def quaternion_residuals(triple):
    """Max-norm residuals of the seven quaternion identities, by name."""
    I, J, K = triple.I4n, triple.J4n, triple.K4n
    eye = np.eye(I.shape[0])
    return {
        "I*I = -Id": max_abs(I @ I + eye),
        "J*J = -Id": max_abs(J @ J + eye),
        "K*K = -Id": max_abs(K @ K + eye),
        "I*J*K = -Id": max_abs(I @ J @ K + eye),
        "I*J = K": max_abs(I @ J - K),
        "J*K = I": max_abs(J @ K - I),
        "K*I = J": max_abs(K @ I - J),
    }


def verify_quaternion_relations(triple, tol=EXACT_TOL):
    """Check the seven quaternion identities; returns a VerificationReport."""
    checks = [CheckRecord(name=name, residual=res, tolerance=tol)
              for name, res in quaternion_residuals(triple).items()]
    return VerificationReport(checks=checks, meta={"n": triple.n})


# ---------------------------------------------------------------------------
# linear Liouville fields


@dataclass(frozen=True, eq=False)
class LiouvilleFieldSpec:
    """A linear Liouville field on the doubled space.

    R is Hamiltonian and S symmetric (2n x 2n each); A is the induced
    doubly-Hamiltonian 4n x 4n block matrix [[R, S], [-J S J, -R^T]] and
    W = (Id + A)/2 is the matrix of the shifted field z -> W z.
    """

    n: int
    R: np.ndarray
    S: np.ndarray
    A: np.ndarray
    W: np.ndarray


def build_liouville_spec(R, S, tol=EXACT_TOL):
    """Assemble the doubled-space field matrices from a pair (R, S).

    Requires S symmetric and R Hamiltonian (both to `tol`); raises
    StructureError naming the offending matrix otherwise.
    """
    R = _as_square_even(R, "R")
    S = _as_square_even(S, "S")
    if R.shape != S.shape:
        raise ValueError(f"R and S differ in shape: {R.shape} vs {S.shape}")
    n = R.shape[0] // 2
    sym_res = max_abs(S - S.T)
    if sym_res > tol:
        raise StructureError(f"S is not symmetric: ||S - S^T|| = {sym_res:.3e}")
    J = make_standard_J(n)
    ham_res = hamiltonian_residual(R, J)
    if ham_res > tol:
        raise StructureError(f"R is not Hamiltonian: ||R^T J + J R|| = {ham_res:.3e}")
    A = np.block([[R, S], [-J @ S @ J, -R.T]])
    W = 0.5 * (np.eye(4 * n) + A)
    return LiouvilleFieldSpec(n=n, R=R, S=S, A=A, W=W)


def verify_k_nonhamiltonian(spec):
    """Max-norm of A^T K + K A for the K structure matrix.

    Zero means the field is Hamiltonian for the K-form as well, which
    degenerates the construction; a healthy spec has a strictly positive
    value (forced whenever R has a nonzero symmetric part).
    """
    K = make_triple(spec.n).K4n
    return max_abs(spec.A.T @ K + K @ spec.A)


def liouville_residual(W, Omega):
    """Max-norm of W^T Omega + Omega W - Omega.

    For the linear field z -> W z this is the defect of d(i_Z omega) = omega,
    with the form-matrix convention from the module docstring.
    """
    W = _as_square_even(W, "W")
    Omega = _as_square_even(Omega, "Omega")
    if W.shape != Omega.shape:
        raise ValueError(f"W and Omega differ in shape: {W.shape} vs {Omega.shape}")
    return max_abs(W.T @ Omega + Omega @ W - Omega)


def is_liouville_linear(W, Omega, tol=1e-10):
    """True iff the linear field z -> W z is Liouville for the form Omega."""
    return liouville_residual(W, Omega) <= tol


def theta_eval(spec, Omega, point):
    """Covector of the contracted 1-form at a point: (W p)^T Omega.

    The returned covector always annihilates the field vector W p itself
    (antisymmetry of Omega).
    """
    Omega = _as_square_even(Omega, "Omega")
    point = _as_vector(point, "point")
    if point.size != 4 * spec.n or Omega.shape[0] != 4 * spec.n:
        raise ValueError(
            f"expected dimension {4 * spec.n}, got point {point.size}, "
            f"form {Omega.shape[0]}")
    return (spec.W @ point) @ Omega


def pointwise_v(spec, x, X):
    """Field vector at the stacked point (x, X): W (x; X)."""
    x = _as_vector(x, "x")
    X = _as_vector(X, "X")
    if x.size != 2 * spec.n or X.size != 2 * spec.n:
        raise ValueError(
            f"expected two vectors of dimension {2 * spec.n}, "
            f"got {x.size} and {X.size}")
    return spec.W @ np.concatenate([x, X])


def projection_residual(spec, x, X):
    """Defect of the graph projection equation at (x, X).

    The kernel equation of the projection is the vanishing of the sum of
    the two 2n-blocks of the I-rotated field vector:

        [-J S J x + (I - R^T) X] + [-(I + R) x - S X] = 0,

    which holds exactly when X is the image of x under the extracted map.
    Returns the max-norm of the left-hand side.
    """
    x = _as_vector(x, "x")
    X = _as_vector(X, "X")
    n = spec.n
    if x.size != 2 * n or X.size != 2 * n:
        raise ValueError(
            f"expected two vectors of dimension {2 * n}, got {x.size} and {X.size}")
    eye = np.eye(2 * n)
    J = make_standard_J(n)
    top = -J @ spec.S @ J @ x + (eye - spec.R.T) @ X
    bottom = -(eye + spec.R) @ x - spec.S @ X
    return max_abs(top + bottom)


def extract_map(R, S, tol=EXACT_TOL):
    """Symplectic map cut out by the graph projection: cayley(R + S).

    Requires R symmetric and Hamiltonian, and S symmetric and Hamiltonian
    (equivalently S = J S J), so that H = R + S is a well-defined Hamiltonian
    matrix. The result is both symmetric and symplectic, and satisfies the
    projection equation: projection_residual(spec, x, map(x)) = 0.

    Raises StructureError naming the violated condition, or
    ExceptionalMatrixError when I - H is numerically singular.
    """
    R = _as_square_even(R, "R")
    S = _as_square_even(S, "S")
    if R.shape != S.shape:
        raise ValueError(f"R and S differ in shape: {R.shape} vs {S.shape}")
    J = make_standard_J(R.shape[0] // 2)
    res = max_abs(R - R.T)
    if res > tol:
        raise StructureError(f"R is not symmetric: ||R - R^T|| = {res:.3e}")
    res = hamiltonian_residual(R, J)
    if res > tol:
        raise StructureError(f"R is not Hamiltonian: ||R^T J + J R|| = {res:.3e}")
    res = max_abs(S - S.T)
    if res > tol:
        raise StructureError(f"S is not symmetric: ||S - S^T|| = {res:.3e}")
    res = hamiltonian_residual(S, J)
    if res > tol:
        raise StructureError(
            f"S is not Hamiltonian (S != J S J): ||S^T J + J S|| = {res:.3e}")
    return cayley(R + S)


def perp_identity_report(R, S, x):
    """Residuals of the two candidate identities for rotated probes.

    With map = extract_map(R, S), X = map(x), x_perp = J x and X_perp = J X,
    returns the pair

        (||X_perp - map(x_perp)||,  ||X_perp - map^{-1}(x_perp)||).

    Only the second (inverse form) is expected to vanish: J map = map^{-1} J
    whenever the generator R + S is symmetric Hamiltonian. Both numbers are
    reported so callers can see the asymmetry; nothing is asserted here.
    """
    smap = extract_map(R, S)
    x = _as_vector(x, "x")
    J = make_standard_J(smap.n)
    X = smap.apply(x)
    x_perp = J @ x
    X_perp = J @ X
    direct = max_abs(X_perp - smap.matrix @ x_perp)
    inverse = max_abs(X_perp - np.linalg.solve(smap.matrix, x_perp))
    return direct, inverse


# ---------------------------------------------------------------------------
# graph frames


@dataclass(frozen=True, eq=False)
class GraphFrame:
    """Column frame [Id; M] spanning the tangent space of a map's graph."""

    n: int
    frame: np.ndarray


def graph_frame(smap):
    """Stacked 4n x 2n frame [Id; M] for the graph of a symplectic map."""
    M = smap.matrix if isinstance(smap, SymplecticMap) else _as_square_even(smap, "map")
    n = M.shape[0] // 2
    return GraphFrame(n=n, frame=np.vstack([np.eye(2 * n), M]))


def restriction(frame, Omega):
    """Pull a 4n x 4n form back to the graph: frame^T Omega frame.

    The result is 2n x 2n and antisymmetric. Graph is Lagrangian for Omega
    iff the result vanishes; it is a symplectic subspace iff the result is
    nondegenerate (smallest singular value bounded away from zero).
    """
    F = frame.frame if isinstance(frame, GraphFrame) else np.asarray(frame, dtype=float)
    Omega = _as_square_even(Omega, "Omega")
    if F.ndim != 2 or F.shape[0] != Omega.shape[0]:
        raise ValueError(
            f"frame rows ({F.shape[0]}) must match form dimension ({Omega.shape[0]})")
    return F.T @ Omega @ F
