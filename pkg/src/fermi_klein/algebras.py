"""Ready-made graded algebras used by the tests, the CLI and the examples."""

from __future__ import annotations

import numpy as np

from .graded_core import DEFAULT_TOLERANCE, GradedAlgebra, Grading

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def matrix_unit(d: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def full_matrix_basis(d: int) -> np.ndarray:
    """Identity followed by every matrix unit except ``E_{d-1,d-1}``."""
    units = [matrix_unit(d, i, j) for i in range(d) for j in range(d) if (i, j) != (d - 1, d - 1)]
    return np.stack([np.eye(d, dtype=complex), *units])


def pauli_m2(tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """``M_2`` in the Pauli basis, graded by ``Ad sigma_z``."""
    return GradedAlgebra(2, [I2, SIGMA_Z, SIGMA_X, SIGMA_Y], Grading.inner(SIGMA_Z), tol)


def full_matrix_algebra(d: int, signs, tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """``M_d`` graded by the inner unitary ``diag(signs)``."""
    u = np.diag(np.asarray(signs, dtype=float)).astype(complex)
    if u.shape != (d, d):
        raise ValueError("need one sign per basis vector")
    return GradedAlgebra(d, full_matrix_basis(d), Grading.inner(u), tol)


def m3(tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """``M_3`` graded by ``diag(1, 1, -1)``."""
    return full_matrix_algebra(3, [1, 1, -1], tol)


def m2_plus_m2(tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """``M_2 ⊕ M_2`` in ``C^4``, graded by ``sigma_z ⊕ sigma_z`` (blocks are not swapped)."""
    z = np.zeros((2, 2), dtype=complex)

    def left(x):
        return np.block([[x, z], [z, z]])

    def right(x):
        return np.block([[z, z], [z, x]])

    e = [matrix_unit(2, i, j) for i, j in ((0, 0), (0, 1), (1, 0))]
    basis = [np.eye(4, dtype=complex), *(left(x) for x in e), right(matrix_unit(2, 0, 0)),
             right(matrix_unit(2, 0, 1)), right(matrix_unit(2, 1, 0)), right(matrix_unit(2, 1, 1))]
    u = np.block([[SIGMA_Z, z], [z, SIGMA_Z]])
    return GradedAlgebra(4, basis, Grading.inner(u), tol)


def diagonal_algebra(d: int, tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """Diagonal matrices, trivially graded."""
    basis = [np.eye(d, dtype=complex)] + [matrix_unit(d, i, i) for i in range(d - 1)]
    return GradedAlgebra(d, basis, Grading.from_basis_map(np.eye(d)), tol)


def scalars(tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """The trivial algebra ``C`` on ``C^1``."""
    return GradedAlgebra(1, [np.eye(1, dtype=complex)], Grading.inner(np.eye(1)), tol)


def swap_leg(tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """``span{1, sigma_x}`` with the outer grading ``Ad sigma_z``, which swaps its minimal projections."""
    return GradedAlgebra(2, [I2, SIGMA_X], Grading.ambient(SIGMA_Z), tol)


def trivially_graded_m2(tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    return GradedAlgebra(2, [I2, SIGMA_Z, SIGMA_X, SIGMA_Y], Grading.inner(I2), tol)


KLEIN_SUITE = {"M2": pauli_m2, "M2+M2": m2_plus_m2, "M3": m3}
