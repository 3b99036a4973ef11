"""Dense complex matrix algebra and spin operators on the 2^N Hilbert space.

Conventions used throughout: the single-site basis is (|e>, |g>) so that
sigma_z = diag(1, -1), and site 1 is the leftmost Kronecker factor.
"""

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |e><g|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|
IDENTITY_2 = np.eye(2, dtype=complex)


class NonHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def kron(a, b):
    """Kronecker product of two square complex matrices."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects square matrices")
    return np.kron(a, b)


def local_operator(k, op, n_cells):
    """Embed a 2x2 operator on site k (1-based) of an n_cells chain.

    Identity on every other site; site 1 is the leftmost factor.
    """
    if not 1 <= k <= n_cells:
        raise IndexError(f"site index {k} out of range 1..{n_cells}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError("local operator block must be 2x2")
    left = np.eye(2 ** (k - 1), dtype=complex)
    right = np.eye(2 ** (n_cells - k), dtype=complex)
    return np.kron(np.kron(left, op), right)


def hermiticity_defect(m):
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigensystem(m):
    """Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Backed by LAPACK's tridiagonalization solver (numpy.linalg.eigh);
    degenerate eigenvalues come out contiguously by the ascending sort.
    """
    m = np.asarray(m, dtype=complex)
    defect = hermiticity_defect(m)
    if defect > HERMITICITY_TOL:
        raise NonHermitianError(
            f"matrix is not Hermitian (max |M - M^dag| = {defect:.3e})"
        )
    w, v = np.linalg.eigh(m)
    return EigenSystem(eigenvalues=w, eigenvectors=v)


def commutator(a, b):
    """a @ b - b @ a."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a
