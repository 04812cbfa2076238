"""Graded Hilbert spaces and the Fermi product of operators.

The Fermi product of an operator ``S`` on ``H`` with an operator ``T`` on
``K`` acts on the ordinary Kronecker space ``H (x) K``::

    (S ⊛ T)(xi (x) eta) = eps(T, xi) S xi (x) T eta

for homogeneous ``T`` and ``xi``, where ``eps`` is -1 exactly when both are
odd.  Splitting ``T = T+ + T-`` gives the closed form
``S ⊛ T = S (x) T+ + (S U_H) (x) T-`` used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _linalg as la
from .errors import GradingError, ShapeError
from .graded_core import DEFAULT_TOLERANCE, GradedAlgebra, Grading, generated_algebra


def combined_grade(op_grade: int, vec_grade: int) -> int:
    """-1 when both the operator and the vector are odd, else +1."""
    for g in (op_grade, vec_grade):
        if g not in (1, -1):
            raise ValueError(f"grades must be +1 or -1, got {g!r}")
    return -1 if op_grade == -1 and vec_grade == -1 else 1


@dataclass(frozen=True, eq=False)
class GradedHilbert:
    """``C^dim`` with a self-adjoint unitary ``U = E+ - E-``."""

    dim: int
    grading_unitary: np.ndarray
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        u = np.asarray(self.grading_unitary, dtype=complex)
        if u.shape != (self.dim, self.dim):
            raise ShapeError(f"grading unitary must be {self.dim}x{self.dim}")
        object.__setattr__(self, "grading_unitary", u)
        scale = max(1.0, float(np.linalg.norm(u)))
        bad = max(np.linalg.norm(u - u.conj().T), np.linalg.norm(u @ u - np.eye(self.dim)))
        if bad > self.tolerance * scale:
            raise GradingError(f"grading unitary is not a self-adjoint unitary (residual {bad:.3e})")

    @classmethod
    def trivial(cls, dim: int) -> "GradedHilbert":
        return cls(dim, np.eye(dim))

    @classmethod
    def standard(cls, n_even: int, n_odd: int) -> "GradedHilbert":
        return cls(n_even + n_odd, np.diag([1.0] * n_even + [-1.0] * n_odd))

    @cached_property
    def even_projection(self) -> np.ndarray:
        return 0.5 * (np.eye(self.dim) + self.grading_unitary)

    @cached_property
    def odd_projection(self) -> np.ndarray:
        return 0.5 * (np.eye(self.dim) - self.grading_unitary)

    def operator_parts(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(T+, T-)`` under conjugation by the grading unitary."""
        u = self.grading_unitary
        conj = u @ t @ u
        return 0.5 * (t + conj), 0.5 * (t - conj)

    def operator_grade(self, t: np.ndarray) -> int | str:
        """+1, -1 or ``"mixed"``."""
        plus, minus = self.operator_parts(np.asarray(t, dtype=complex))
        scale = max(1.0, float(np.linalg.norm(t)))
        if np.linalg.norm(minus) <= self.tolerance * scale:
            return 1
        if np.linalg.norm(plus) <= self.tolerance * scale:
            return -1
        return "mixed"

    def vector_grade(self, xi: np.ndarray) -> int | str:
        xi = np.asarray(xi, dtype=complex)
        scale = max(1.0, float(np.linalg.norm(xi)))
        if np.linalg.norm(self.odd_projection @ xi) <= self.tolerance * scale:
            return 1
        if np.linalg.norm(self.even_projection @ xi) <= self.tolerance * scale:
            return -1
        return "mixed"

    def tensor(self, other: "GradedHilbert") -> "GradedHilbert":
        return GradedHilbert(self.dim * other.dim, np.kron(self.grading_unitary, other.grading_unitary),
                             max(self.tolerance, other.tolerance))


def _check_shapes(s, t, h: GradedHilbert, k: GradedHilbert):
    if s.shape != (h.dim, h.dim) or t.shape != (k.dim, k.dim):
        raise ShapeError(f"operators of shape {s.shape}, {t.shape} do not act on dims {h.dim}, {k.dim}")


def fermi_op_product(s, t, h: GradedHilbert, k: GradedHilbert) -> np.ndarray:
    """Matrix of ``S ⊛ T`` on ``H (x) K`` (row-major Kronecker order)."""
    s = np.asarray(s, dtype=complex)
    t = np.asarray(t, dtype=complex)
    _check_shapes(s, t, h, k)
    t_plus, t_minus = k.operator_parts(t)
    return np.kron(s, t_plus) + np.kron(s @ h.grading_unitary, t_minus)


def fermi_vn_product(alg_a, alg_b, h: GradedHilbert, k: GradedHilbert,
                     tol: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    """The algebra generated by all ``S ⊛ T`` for basis elements ``S``, ``T``.

    The result is graded by the ambient unitary ``U_H (x) U_K``.
    """
    a = la.as_stack(alg_a.basis if isinstance(alg_a, GradedAlgebra) else alg_a)
    b = la.as_stack(alg_b.basis if isinstance(alg_b, GradedAlgebra) else alg_b)
    gens = np.stack([fermi_op_product(s, t, h, k) for s in a for t in b])
    d = h.dim * k.dim
    basis = generated_algebra(gens, d, tol)
    return GradedAlgebra(d, basis, Grading.ambient(np.kron(h.grading_unitary, k.grading_unitary)), tol)
