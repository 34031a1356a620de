"""Seeded random generators for structured test matrices.

Everything takes a numpy Generator, so property suites can seed per trial
(e.g. ``np.random.default_rng((seed, trial))``) and stay independent of
execution order.
"""

import numpy as np

from .linalg import make_standard_J, max_abs


def symmetric_part(M):
    return 0.5 * (M + np.asarray(M).T)


def hamiltonian_part(M, J=None):
    """Project onto the Hamiltonian subspace: P(M) = (M + J M^T J) / 2.

    J P(M) is symmetric for every M, P fixes Hamiltonian matrices, and P
    preserves symmetry, so symmetrize-then-project samples matrices that are
    simultaneously symmetric and Hamiltonian.
    """
    M = np.asarray(M, dtype=float)
    if J is None:
        J = make_standard_J(M.shape[0] // 2)
    return 0.5 * (M + J @ M.T @ J)


def _rescaled(M, scale):
    if scale is None:
        return M
    m = max_abs(M)
    return M * (scale / m) if m > 0 else M


def _non_exceptional(M, det_floor):
    eye = np.eye(M.shape[0])
    return (abs(np.linalg.det(eye - M)) >= det_floor
            and abs(np.linalg.det(eye + M)) >= det_floor)


def random_symmetric(dim, rng):
    """Symmetric dim x dim matrix with Gaussian entries."""
    return symmetric_part(rng.standard_normal((dim, dim)))


def random_hamiltonian(n, rng, scale=None, det_floor=None, max_tries=200):
    """Random 2n x 2n Hamiltonian matrix.

    `scale` rescales to the given max-norm. With `det_floor` set, draws with
    |det(I +- H)| below the floor are rejected and resampled (so the Cayley
    transform of the result is well-posed).
    """
    J = make_standard_J(n)
    for _ in range(max_tries):
        H = _rescaled(hamiltonian_part(rng.standard_normal((2 * n, 2 * n)), J), scale)
        if det_floor is None or _non_exceptional(H, det_floor):
            return H
    raise RuntimeError(f"no non-exceptional Hamiltonian draw in {max_tries} tries")


def random_symmetric_hamiltonian(n, rng, scale=None, det_floor=None, max_tries=200):
    """Random 2n x 2n matrix that is both symmetric and Hamiltonian."""
    J = make_standard_J(n)
    for _ in range(max_tries):
        M = symmetric_part(rng.standard_normal((2 * n, 2 * n)))
        H = _rescaled(hamiltonian_part(M, J), scale)
        if det_floor is None or _non_exceptional(H, det_floor):
            return H
    raise RuntimeError(
        f"no non-exceptional symmetric Hamiltonian draw in {max_tries} tries")


def random_admissible_pair(n, rng, det_floor=1e-8, max_tries=200):
    """Pair (R, S), both symmetric Hamiltonian, with R + S non-exceptional.

    These are exactly the inputs accepted by ``product.extract_map``; draws
    whose sum has |det(I +- (R+S))| < det_floor are rejected and resampled.
    """
    for _ in range(max_tries):
        R = random_symmetric_hamiltonian(n, rng)
        S = random_symmetric_hamiltonian(n, rng)
        if _non_exceptional(R + S, det_floor):
            return R, S
    raise RuntimeError(f"no admissible (R, S) draw in {max_tries} tries")
