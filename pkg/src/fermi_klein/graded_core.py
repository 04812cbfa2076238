"""Finite-dimensional Z2-graded *-algebras realised inside d x d matrices.

A :class:`GradedAlgebra` is a unital *-subalgebra of ``M_d(C)`` given by a
basis whose first element is the identity, together with a grading
automorphism.  The grading may be supplied as an inner self-adjoint unitary,
as an ambient implementing unitary, or as a matrix acting on basis
coordinates; all three are canonicalised to the coordinate matrix
:attr:`GradedAlgebra.basis_map` whose column ``j`` holds the coordinates of
``alpha(basis[j])``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from . import _linalg as la
from .errors import (
    ClosureError,
    GradingError,
    GradingNotInner,
    MembershipError,
    NotUnitalError,
    ShapeError,
)
from .report import Check, Report, residual_check

DEFAULT_TOLERANCE = 1e-9

GRADING_KINDS = ("inner", "ambient", "basis_map")


@dataclass(frozen=True, eq=False)
class Grading:
    """How the grading automorphism is specified.

    ``kind`` is one of ``"inner"`` (``data`` is a self-adjoint unitary of the
    algebra), ``"ambient"`` (``data`` is a self-adjoint unitary of ``C^d``
    normalising the algebra) or ``"basis_map"`` (``data`` is the square
    coordinate matrix of the automorphism).  ``basis_map`` may be supplied as
    well for the two unitary kinds; :func:`validate` then checks they agree.
    """

    kind: str
    data: np.ndarray
    basis_map: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in GRADING_KINDS:
            raise ValueError(f"unknown grading kind {self.kind!r}")
        object.__setattr__(self, "data", np.asarray(self.data, dtype=complex))
        if self.basis_map is not None:
            object.__setattr__(self, "basis_map", np.asarray(self.basis_map, dtype=complex))

    @classmethod
    def inner(cls, u) -> "Grading":
        return cls("inner", u)

    @classmethod
    def ambient(cls, v) -> "Grading":
        return cls("ambient", v)

    @classmethod
    def from_basis_map(cls, g) -> "Grading":
        return cls("basis_map", g)


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    """A unital Z2-graded *-subalgebra of ``M_d(C)``.

    Args:
        ambient_dim: ``d``.
        basis: linear basis of the algebra; ``basis[0]`` must be the identity.
        grading: the grading automorphism, see :class:`Grading`.
        tolerance: relative tolerance for membership and equality tests.
        inner_unit: optional self-adjoint unitary of the algebra implementing
            the grading, used instead of searching for one.
        structure: optional fast coordinate engine (set by product builders).
    """

    ambient_dim: int
    basis: Sequence[np.ndarray]
    grading: Grading
    tolerance: float = DEFAULT_TOLERANCE
    inner_unit: np.ndarray | None = field(default=None, repr=False)
    structure: Any = field(default=None, repr=False)

    def __post_init__(self):
        d = int(self.ambient_dim)
        if d <= 0:
            raise ShapeError("ambient_dim must be positive")
        stack = la.as_stack(self.basis) if len(self.basis) else np.zeros((0, d, d), complex)
        if stack.ndim != 3 or stack.shape[1:] != (d, d):
            raise ShapeError(f"basis elements must be {d}x{d} matrices")
        if stack.shape[0] == 0:
            raise ShapeError("basis must be nonempty")
        tol = float(self.tolerance)
        if tol < 0:
            raise ValueError("tolerance must be nonnegative")
        eye = np.eye(d)
        if np.linalg.norm(stack[0] - eye) > tol * max(1.0, np.sqrt(d)):
            raise NotUnitalError("basis[0] must be the identity of the ambient matrix algebra")
        stack = stack.copy()
        stack[0] = eye
        stack.setflags(write=False)
        object.__setattr__(self, "ambient_dim", d)
        object.__setattr__(self, "basis", stack)
        object.__setattr__(self, "tolerance", tol)
        g = self.grading
        if g.kind in ("inner", "ambient") and g.data.shape != (d, d):
            raise ShapeError("grading unitary must be d x d")
        if g.kind == "basis_map" and g.data.shape != (stack.shape[0],) * 2:
            raise ShapeError("basis_map grading must be square over the basis")
        if self.inner_unit is not None:
            object.__setattr__(self, "inner_unit", np.asarray(self.inner_unit, dtype=complex))

    # ------------------------------------------------------------------ basics
    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.ambient_dim, dtype=complex)

    def scale(self, x: np.ndarray) -> float:
        return max(1.0, float(np.linalg.norm(x)))

    @cached_property
    def _basis_cols(self) -> np.ndarray:
        return la.vec(self.basis)

    @cached_property
    def _pinv(self) -> np.ndarray:
        return np.linalg.pinv(self._basis_cols, rcond=self.tolerance)

    @cached_property
    def orthonormal(self) -> np.ndarray:
        """Orthonormal (Hilbert-Schmidt) column basis of the span."""
        return la.orthonormal_columns(self._basis_cols, self.tolerance)

    def coords_batch(self, xs: np.ndarray) -> np.ndarray:
        """Coordinates of a stack of matrices, shape ``(k, dim)``; no membership check."""
        xs = la.as_stack(xs)
        if self.structure is not None:
            return self.structure.coords_batch(xs)
        return (self._pinv @ la.vec(xs)).T

    def combine_batch(self, cs: np.ndarray) -> np.ndarray:
        cs = np.atleast_2d(np.asarray(cs, dtype=complex))
        if self.structure is not None:
            return self.structure.combine_batch(cs)
        return np.tensordot(cs, self.basis, axes=1)

    def membership_residuals(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates and relative residuals ``|x - sum c_i b_i| / max(1, |x|)``."""
        xs = la.as_stack(xs)
        cs = self.coords_batch(xs)
        back = self.combine_batch(cs)
        diff = np.linalg.norm((xs - back).reshape(xs.shape[0], -1), axis=1)
        scale = np.maximum(np.linalg.norm(xs.reshape(xs.shape[0], -1), axis=1), 1.0)
        return cs, diff / scale

    def coords(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of ``x`` in :attr:`basis`; raises MembershipError outside the span."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.ambient_dim, self.ambient_dim):
            raise ShapeError(f"expected a {self.ambient_dim}x{self.ambient_dim} matrix, got {x.shape}")
        cs, res = self.membership_residuals(x)
        if res[0] > self.tolerance:
            raise MembershipError(f"element not in algebra (relative residual {res[0]:.3e})")
        return cs[0]

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.ambient_dim, self.ambient_dim):
            return False
        return bool(self.membership_residuals(x)[1][0] <= self.tolerance)

    def combine(self, c: np.ndarray) -> np.ndarray:
        return self.combine_batch(np.asarray(c)[None])[0]

    # ----------------------------------------------------------------- grading
    @cached_property
    def basis_map(self) -> np.ndarray:
        g = self.grading
        if g.kind == "basis_map":
            return g.data.copy()
        if g.basis_map is not None:
            return g.basis_map.copy()
        return self.unitary_basis_map

    @cached_property
    def unitary_basis_map(self) -> np.ndarray:
        """Coordinates of ``V b V`` for the supplied grading unitary ``V``."""
        v = self.grading.data
        return self.coords_batch(v[None] @ self.basis @ v[None]).T

    def alpha_coords(self, c: np.ndarray) -> np.ndarray:
        return self.basis_map @ c

    def alpha(self, x: np.ndarray) -> np.ndarray:
        """The grading automorphism applied to an element of the algebra."""
        return self.combine(self.basis_map @ self.coords(x))

    @cached_property
    def implementing_unitary(self) -> np.ndarray:
        """A self-adjoint unitary ``V`` of ``C^d`` with ``V b V = alpha(b)``.

        For inner and ambient gradings this is the supplied unitary.  For a
        coordinate grading it is ``sign(H)`` of a random self-adjoint
        intertwiner ``H``; such ``sign(H)`` intertwines because ``H^2``
        lies in the commutant.
        """
        g = self.grading
        if g.kind in ("inner", "ambient"):
            return g.data.copy()
        h = _random_selfadjoint_intertwiner(self, self._intertwiner_space_ambient())
        return _unitary_sign(h, self.tolerance)

    def _intertwiner_space_ambient(self) -> np.ndarray:
        d = self.ambient_dim
        images = self.combine_batch(self.basis_map.T)
        eye = np.eye(d)
        # vec_r(X b - a X) = (I (x) b^T - a (x) I) vec_r(X)
        blocks = (np.kron(eye, b.T) - np.kron(a, eye) for b, a in zip(self.basis, images))
        return la.null_space_stacked(blocks, d * d, self.tolerance, _max_norm(self.basis))

    @cached_property
    def inner_unitary(self) -> np.ndarray:
        """Self-adjoint unitary ``u`` in the algebra with ``alpha = Ad u``.

        Raises:
            GradingNotInner: no such unitary exists in the algebra.
        """
        if self.inner_unit is not None:
            return self.inner_unit.copy()
        if self.grading.kind == "inner":
            return self.grading.data.copy()
        m = self.dim
        images = self.combine_batch(self.basis_map.T)
        # coefficients c with (sum c_k x_k) b_i = alpha(b_i) (sum c_k x_k)
        blocks = []
        for b, a in zip(self.basis, images):
            blocks.append(la.vec(self.basis @ b[None] - a[None] @ self.basis))
        null = la.null_space_stacked(blocks, m, self.tolerance, _max_norm(self.basis) ** 2)
        if null.shape[1] == 0:
            raise GradingNotInner("grading is not implemented by a unitary of the algebra")
        cands = self.combine_batch(null.T)
        h = _random_selfadjoint_intertwiner_from(cands)
        return _unitary_sign(h, self.tolerance, error=GradingNotInner)

    @property
    def is_inner(self) -> bool:
        try:
            self.inner_unitary
        except GradingNotInner:
            return False
        return True

    def with_tolerance(self, tol: float) -> "GradedAlgebra":
        return GradedAlgebra(self.ambient_dim, self.basis, self.grading, tol, self.inner_unit, self.structure)


def _random_selfadjoint_intertwiner(alg: GradedAlgebra, null: np.ndarray) -> np.ndarray:
    if null.shape[1] == 0:
        raise GradingError("grading is not implementable on the ambient space")
    return _random_selfadjoint_intertwiner_from(la.unvec(null, alg.ambient_dim))


def _random_selfadjoint_intertwiner_from(cands: np.ndarray) -> np.ndarray:
    # alpha is an involution, so X* intertwines whenever X does
    rng = np.random.default_rng(12345)
    herm = la.hermitian_parts(cands)
    coeff = rng.standard_normal(herm.shape[0])
    return np.tensordot(coeff, herm, axes=1)


def _unitary_sign(h: np.ndarray, tol: float, error=GradingError) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    top = max(float(np.max(np.abs(w))), 1e-300)
    if np.min(np.abs(w)) <= max(tol, 1e-12) * top:
        raise error("no invertible self-adjoint intertwiner found")
    return (v * np.sign(w)) @ v.conj().T


# ---------------------------------------------------------------------- checks
def validate(algebra: GradedAlgebra) -> Report:
    """Check every structural invariant of ``algebra``; never raises."""
    tol = algebra.tolerance
    rep = Report()
    basis = algebra.basis
    d = algebra.ambient_dim
    m = algebra.dim

    rep.add(residual_check("unit", float(np.linalg.norm(basis[0] - np.eye(d))), tol))
    deficit = m - la.rank(algebra._basis_cols, tol)
    rep.add(Check("linear_independence", float(deficit), deficit == 0))

    prods = (basis[:, None] @ basis[None, :]).reshape(-1, d, d)
    _, res_p = algebra.membership_residuals(prods)
    rep.add(Check("closure_product", float(res_p.max()), bool(res_p.max() <= tol)))
    _, res_a = algebra.membership_residuals(la.dagger(basis))
    rep.add(Check("closure_adjoint", float(res_a.max()), bool(res_a.max() <= tol)))

    g = algebra.grading
    if g.kind in ("inner", "ambient"):
        v = g.data
        unit_res = max(
            float(np.linalg.norm(v - v.conj().T)),
            float(np.linalg.norm(v @ v - np.eye(d))),
        ) / max(1.0, float(np.linalg.norm(v)))
        rep.add(Check("grading_unitary", unit_res, unit_res <= tol))
        _, res_g = algebra.membership_residuals(v[None] @ basis @ v[None])
        rep.add(Check("grading_preserves_algebra", float(res_g.max()), bool(res_g.max() <= tol)))
        if g.kind == "inner":
            _, res_u = algebra.membership_residuals(v)
            rep.add(Check("inner_unitary_in_algebra", float(res_u[0]), bool(res_u[0] <= tol)))
        if g.basis_map is not None:
            if g.basis_map.shape == (m, m):
                diff = float(np.max(np.abs(g.basis_map - algebra.unitary_basis_map)))
            else:
                diff = float("inf")
            rep.add(Check("basis_map_consistent", diff, diff <= tol))

    gm = algebra.basis_map
    alpha_b = algebra.combine_batch(gm.T)
    alpha2_b = algebra.combine_batch((gm @ gm).T)
    inv = float(np.max(np.linalg.norm((alpha2_b - basis).reshape(m, -1), axis=1)))
    rep.add(Check("grading_involution", inv, inv <= tol * max(1.0, _max_norm(basis))))

    prod_c = algebra.coords_batch(prods)
    lhs = algebra.combine_batch(prod_c @ gm.T)
    rhs = (alpha_b[:, None] @ alpha_b[None, :]).reshape(-1, d, d)
    mult = float(np.max(np.linalg.norm((lhs - rhs).reshape(m * m, -1), axis=1)))
    rep.add(Check("grading_multiplicative", mult, mult <= tol * max(1.0, _max_norm(prods))))

    adj_c = algebra.coords_batch(la.dagger(basis))
    star = algebra.combine_batch(adj_c @ gm.T) - la.dagger(alpha_b)
    star_r = float(np.max(np.linalg.norm(star.reshape(m, -1), axis=1)))
    rep.add(Check("grading_star", star_r, star_r <= tol * max(1.0, _max_norm(basis))))
    return rep


def _max_norm(stack: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(stack.reshape(stack.shape[0], -1), axis=1)))


# ----------------------------------------------------------- decomposition
def even_part(a: np.ndarray, algebra: GradedAlgebra) -> np.ndarray:
    """``(a + alpha(a)) / 2``."""
    c = algebra.coords(a)
    return algebra.combine(0.5 * (c + algebra.basis_map @ c))


def odd_part(a: np.ndarray, algebra: GradedAlgebra) -> np.ndarray:
    """``(a - alpha(a)) / 2``."""
    c = algebra.coords(a)
    return algebra.combine(0.5 * (c - algebra.basis_map @ c))


def conditional_expectation_even(a: np.ndarray, algebra: GradedAlgebra) -> np.ndarray:
    """The conditional expectation ``E = (id + alpha) / 2`` onto the even part."""
    return even_part(a, algebra)


def homogeneous_coordinates(algebra: GradedAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate bases (columns) of the even and odd subspaces."""
    m = algebra.dim
    g = algebra.basis_map
    tol = algebra.tolerance
    even = la.orthonormal_columns(0.5 * (np.eye(m) + g), tol)
    odd = la.orthonormal_columns(0.5 * (np.eye(m) - g), tol)
    return even, odd


def homogeneous_basis(algebra: GradedAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """Stacks of even and odd matrices spanning the algebra."""
    even, odd = homogeneous_coordinates(algebra)
    return algebra.combine_batch(even.T), algebra.combine_batch(odd.T)


def even_subalgebra(algebra: GradedAlgebra) -> GradedAlgebra:
    """The fixed-point algebra of the grading, trivially graded."""
    even, _ = homogeneous_basis(algebra)
    basis = unital_basis(even, algebra.ambient_dim, algebra.tolerance)
    return GradedAlgebra(
        algebra.ambient_dim,
        basis,
        Grading.from_basis_map(np.eye(len(basis))),
        algebra.tolerance,
    )


def trivially_graded(basis, tolerance: float = DEFAULT_TOLERANCE) -> GradedAlgebra:
    stack = la.as_stack(basis)
    return GradedAlgebra(stack.shape[1], stack, Grading.from_basis_map(np.eye(stack.shape[0])), tolerance)


# ------------------------------------------------------------- span algebra
def unital_basis(mats, ambient_dim: int, tol: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Identity followed by an orthonormal basis of ``span(mats) ⊖ C·1``."""
    d = ambient_dim
    eye = np.eye(d, dtype=complex)
    q0 = la.vec(eye / np.sqrt(d))
    stack = la.as_stack(mats) if len(mats) else np.zeros((0, d, d), complex)
    rest = la.extend_orthonormal(q0, la.vec(stack), tol) if stack.shape[0] else np.zeros((d * d, 0))
    return np.concatenate([eye[None], la.unvec(rest, d)]) if rest.shape[1] else eye[None]


def generated_algebra(generators, ambient_dim: int, tol: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Basis (identity first) of the unital *-algebra generated by ``generators``.

    Words are grown by left multiplication with the generators and their
    adjoints, feeding only the newly found directions into the next round, so
    each direction is multiplied once.
    """
    d = ambient_dim
    gens = la.as_stack(generators)
    if gens.shape[1:] != (d, d):
        raise ShapeError(f"generators must be {d}x{d}")
    letters = np.concatenate([gens, la.dagger(gens)])
    eye = np.eye(d, dtype=complex)
    q = la.vec(eye / np.sqrt(d))
    frontier = eye[None]
    rounds = 0
    while frontier.shape[0]:
        rounds += 1
        if rounds > d * d + 1:
            raise ClosureError(f"closure did not stabilise within {d * d} rounds (dimension {q.shape[1]})")
        words = (letters[:, None] @ frontier[None, :]).reshape(-1, d, d)
        new = la.extend_orthonormal(q, la.vec(words), tol)
        q = np.hstack([q, new])
        frontier = la.unvec(new, d) if new.shape[1] else np.zeros((0, d, d), complex)
    return np.concatenate([eye[None], la.unvec(q[:, 1:], d)]) if q.shape[1] > 1 else eye[None]


def commutant(algebra_basis, ambient_dim: int | None = None, tol: float = DEFAULT_TOLERANCE,
              seed: int = 0) -> np.ndarray:
    """Basis (identity first) of ``{X : X b = b X for all b}``."""
    stack = la.as_stack(algebra_basis)
    d = stack.shape[1] if ambient_dim is None else ambient_dim
    cols = la.commutant_columns(stack, tol, np.random.default_rng(seed))
    return unital_basis(la.unvec(cols, d), d, tol)


def center(algebra_basis, tol: float = DEFAULT_TOLERANCE, seed: int = 0) -> np.ndarray:
    """Basis (identity first) of ``M ∩ M'``."""
    stack = la.as_stack(algebra_basis)
    d = stack.shape[1]
    q_m = la.orthonormal_columns(la.vec(stack), tol)
    q_c = la.commutant_columns(stack, tol, np.random.default_rng(seed))
    inter = la.intersect_spans(q_m, q_c, tol)
    return unital_basis(la.unvec(inter, d), d, tol)


def span_residual(a, b, tol: float = DEFAULT_TOLERANCE) -> float:
    """0 when the two stacks span the same space; ``inf`` for unequal dimensions."""
    return la.span_distance(la.vec(a), la.vec(b), tol)


def is_commutative(basis, tol: float = DEFAULT_TOLERANCE) -> bool:
    stack = la.as_stack(basis)
    comm = stack[:, None] @ stack[None, :] - stack[None, :] @ stack[:, None]
    return float(np.max(np.abs(comm))) <= tol * max(1.0, _max_norm(stack)) ** 2
