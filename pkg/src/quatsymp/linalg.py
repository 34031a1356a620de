"""Dense real matrix kernel: standard symplectic form, structure predicates,
and the Cayley transform between Hamiltonian and symplectic matrices.

Conventions, fixed here once and imported everywhere else:

* ``J = make_standard_J(n)`` is the 2n x 2n block matrix ``[[0, -I_n], [I_n, 0]]``.
* ``M`` is Hamiltonian  iff ``M^T J + J M = 0`` (equivalently, ``J M`` symmetric).
* ``M`` is symplectic   iff ``M^T J M = J``.
* ``M`` is non-exceptional iff both ``|det(I - M)|`` and ``|det(I + M)|`` stay
  above a dimension-scaled threshold, so the Cayley transform and its inverse
  exist numerically.

All norms below are max-norms (largest absolute entry).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ExceptionalMatrixError, StructureError

#: Version tag for the sign/layout conventions above; echoed into CLI output
#: headers so downstream files are self-describing.
CONVENTIONS_VERSION = "1"

#: Condition-number cap for the pivoted solves in `cayley` and the one-step
#: matrix; above this we raise ConditioningError instead of returning garbage.
COND_LIMIT = 1e12

DEFAULT_TOL = 1e-10


def max_abs(M):
    """Largest absolute entry of an array (0.0 for empty input)."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def _as_square_even(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    dim = M.shape[0]
    if dim == 0 or dim % 2 != 0:
        raise ValueError(f"{name} must have positive even dimension, got {dim}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def _as_vector(v, name="vector"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def _same_dim(A, B, what):
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"dimension mismatch in {what}: {A.shape[0]} vs {B.shape[0]}")


def make_standard_J(n):
    """The 2n x 2n matrix [[0, -I_n], [I_n, 0]]; antisymmetric, squares to -I."""
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def hamiltonian_residual(M, J):
    """Max-norm of M^T J + J M (zero iff M is Hamiltonian for J)."""
    M = _as_square_even(M, "M")
    J = _as_square_even(J, "J")
    _same_dim(M, J, "hamiltonian_residual")
    return max_abs(M.T @ J + J @ M)


def is_hamiltonian(M, J, tol=DEFAULT_TOL):
    """True iff ||M^T J + J M||_max <= tol."""
    return hamiltonian_residual(M, J) <= tol


def symplectic_residual(M, J):
    """Max-norm of M^T J M - J (zero iff M preserves the form J)."""
    M = _as_square_even(M, "M")
    J = _as_square_even(J, "J")
    _same_dim(M, J, "symplectic_residual")
    return max_abs(M.T @ J @ M - J)


def is_symplectic(M, J, tol=DEFAULT_TOL):
    """True iff ||M^T J M - J||_max <= tol."""
    return symplectic_residual(M, J) <= tol


def det_threshold(M, base=1e-12):
    """Default non-exceptionality threshold: base scaled by dim * ||M||_max."""
    M = np.asarray(M, dtype=float)
    return base * max(1.0, M.shape[0] * max_abs(M))


def is_non_exceptional(M, threshold=None):
    """True iff |det(I - M)| and |det(I + M)| both exceed the threshold.

    ``threshold=None`` uses :func:`det_threshold`, which guards numerical
    singularity rather than exact singularity.
    """
    M = _as_square_even(M, "M")
    if threshold is None:
        threshold = det_threshold(M)
    eye = np.eye(M.shape[0])
    return (abs(np.linalg.det(eye - M)) > threshold
            and abs(np.linalg.det(eye + M)) > threshold)


@dataclass(frozen=True, eq=False)
class SymplecticMap:
    """A 2n x 2n symplectic matrix.

    Instances built by :func:`cayley`, :func:`SymplecticMap.from_matrix` or
    ``product.extract_map`` are validated against ``M^T J M = J`` at
    construction; the raw constructor trusts its input.
    """

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix",
                           _as_square_even(self.matrix, "symplectic matrix"))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[0] // 2

    @classmethod
    def from_matrix(cls, M, tol=DEFAULT_TOL):
        M = _as_square_even(M, "matrix")
        J = make_standard_J(M.shape[0] // 2)
        res = symplectic_residual(M, J)
        if res > tol:
            raise StructureError(
                f"matrix is not symplectic: ||M^T J M - J|| = {res:.3e} > {tol:.1e}")
        return cls(M)

    def apply(self, z):
        z = _as_vector(z, "state")
        _same_dim(self.matrix, z.reshape(-1, 1), "SymplecticMap.apply")
        return self.matrix @ z

    def inverse(self):
        """Inverse map via the exact symplectic formula S^{-1} = -J S^T J."""
        J = make_standard_J(self.n)
        return SymplecticMap(-J @ self.matrix.T @ J)


def cayley(H, tol=DEFAULT_TOL):
    """Cayley transform S = (I - H)^{-1} (I + H) of a Hamiltonian matrix.

    Parameters
    ----------
    H : array_like
        Square 2n x 2n Hamiltonian matrix (checked to `tol`).
    tol : float
        Tolerance for the Hamiltonian input check and the symplecticity
        check of the result.

    Returns
    -------
    SymplecticMap

    Raises
    ------
    StructureError
        H is not Hamiltonian within `tol`.
    ExceptionalMatrixError
        det(I +- H) is below the non-exceptionality threshold.
    ConditioningError
        The solve with I - H is too ill-conditioned (cond > COND_LIMIT), or
        the computed result fails the symplecticity check beyond what the
        conditioning predicts.
    """
    H = _as_square_even(H, "H")
    dim = H.shape[0]
    J = make_standard_J(dim // 2)
    res = hamiltonian_residual(H, J)
    if res > tol:
        raise StructureError(
            f"H is not Hamiltonian: ||H^T J + J H|| = {res:.3e} > {tol:.1e}")
    if not is_non_exceptional(H):
        raise ExceptionalMatrixError(
            "H is exceptional: det(I - H) or det(I + H) is numerically zero")
    eye = np.eye(dim)
    A = eye - H
    cond = np.linalg.cond(A, 1)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ConditioningError(
            f"I - H has condition estimate {cond:.3e} > {COND_LIMIT:.1e}")
    S = np.linalg.solve(A, eye + H)
    res_s = symplectic_residual(S, J)
    # Roundoff in the solve scales with cond; anything far beyond that means
    # the result cannot be trusted as a symplectic map.
    tol_eff = max(tol, 64.0 * np.finfo(float).eps * cond * max(1.0, max_abs(S)))
    if res_s > tol_eff:
        raise ConditioningError(
            f"Cayley image failed the symplecticity check: residual {res_s:.3e}")
    return SymplecticMap(S)


def inverse_cayley(S, threshold=None):
    """Inverse Cayley transform H = (S - I)(S + I)^{-1}.

    Accepts a SymplecticMap or a plain array. Raises ExceptionalMatrixError
    when det(S + I) is below the threshold (default: `det_threshold`).
    """
    M = S.matrix if isinstance(S, SymplecticMap) else _as_square_even(S, "S")
    dim = M.shape[0]
    eye = np.eye(dim)
    if threshold is None:
        threshold = det_threshold(M)
    if abs(np.linalg.det(M + eye)) <= threshold:
        raise ExceptionalMatrixError(
            "S + I is numerically singular; inverse Cayley transform undefined")
    # H (S + I) = S - I, solved via the transposed system.
    return np.linalg.solve((M + eye).T, (M - eye).T).T


def form_eval(Omega, u, v):
    """Evaluate the bilinear form u^T Omega v.

    Antisymmetric in (u, v) whenever Omega is antisymmetric; callers are
    responsible for passing an antisymmetric Omega.
    """
    Omega = _as_square_even(Omega, "Omega")
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    if u.size != Omega.shape[0] or v.size != Omega.shape[0]:
        raise ValueError(
            f"dimension mismatch in form_eval: form is {Omega.shape[0]}-dim, "
            f"vectors are {u.size} and {v.size}")
    return float(u @ Omega @ v)


def write_matrix(path, M):
    """Write a matrix as plain text: 'rows cols' line, then rows of decimals.

    Values carry 17 significant digits and round-trip exactly through
    `read_matrix`.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]}\n")
        for row in M:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")


def read_matrix(path):
    """Read a matrix written by `write_matrix`; validates shape and finiteness."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'rows cols' header")
        rows, cols = int(header[0]), int(header[1])
        data = []
        for line in fh:
            if line.strip():
                data.extend(float(tok) for tok in line.split())
    if len(data) != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, got {len(data)}")
    M = np.array(data).reshape(rows, cols)
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{path}: non-finite entries")
    return M
