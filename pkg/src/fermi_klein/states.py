"""States, covariant GNS representations and central support.

A state on a :class:`GradedAlgebra` is stored as an ambient density matrix
``rho`` with ``phi(x) = Tr(rho x)``.  Only the restriction to the algebra
matters, so two densities with equal values on the basis are the same state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _linalg as la
from .errors import MembershipError, NotEven, ShapeError, StateInvalid
from .graded_core import GradedAlgebra, conditional_expectation_even
from .graded_hilbert import GradedHilbert, fermi_op_product
from .report import Check, Report, residual_check


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """``phi(x) = Tr(rho x)`` on ``algebra``; ``rho`` is positive with ``phi(1) = 1``."""

    algebra: GradedAlgebra
    density: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.algebra.ambient_dim
        rho = np.asarray(self.density, dtype=complex)
        if rho.shape != (d, d):
            raise ShapeError(f"density must be {d}x{d}, got {rho.shape}")
        tol = self.algebra.tolerance
        scale = max(1.0, float(np.linalg.norm(rho)))
        if np.linalg.norm(rho - rho.conj().T) > tol * scale:
            raise StateInvalid("density is not self-adjoint")
        rho = 0.5 * (rho + rho.conj().T)
        w = np.linalg.eigvalsh(rho)
        if w.size and w[0] < -tol * scale:
            raise StateInvalid(f"density has negative eigenvalue {w[0]:.3e}")
        if abs(np.trace(rho) - 1.0) > tol * scale:
            raise StateInvalid(f"state is not normalised (phi(1) = {np.trace(rho).real:.12g})")
        rho.setflags(write=False)
        object.__setattr__(self, "density", rho)

    @classmethod
    def from_values(cls, algebra: GradedAlgebra, values) -> "StateFunctional":
        """The state taking ``values[i]`` on ``algebra.basis[i]``.

        The density is the minimal-norm solution, which lies in the algebra
        and is the trace-preserving conditional expectation of any density
        realising the same functional; it is positive iff the functional is.
        """
        v = np.asarray(values, dtype=complex)
        if v.shape != (algebra.dim,):
            raise ShapeError(f"expected {algebra.dim} values")
        # Tr(rho b) = <vec(rho), vec(b^T)> without conjugation
        rows = algebra.basis.transpose(0, 2, 1).reshape(algebra.dim, -1)
        rho = (np.linalg.pinv(rows, rcond=algebra.tolerance) @ v).reshape(algebra.ambient_dim, -1)
        return cls(algebra, rho)

    @classmethod
    def tracial(cls, algebra: GradedAlgebra) -> "StateFunctional":
        d = algebra.ambient_dim
        return cls(algebra, np.eye(d) / d)

    @cached_property
    def values(self) -> np.ndarray:
        """``phi(b_i)`` for every basis element."""
        return np.einsum("ij,kji->k", self.density, self.algebra.basis)

    def __call__(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        if not self.algebra.contains(x):
            raise MembershipError("argument is not in the algebra of the state")
        return complex(np.trace(self.density @ x))

    def value_coords(self, c) -> complex:
        return complex(np.asarray(c) @ self.values)

    def evenized_density(self) -> np.ndarray:
        """``(rho + V rho V) / 2``; same functional when the state is even."""
        v = self.algebra.implementing_unitary
        return 0.5 * (self.density + v @ self.density @ v)

    def even_version(self) -> "StateFunctional":
        return StateFunctional(self.algebra, self.evenized_density())


def random_even_state(algebra: GradedAlgebra, rng: np.random.Generator) -> StateFunctional:
    """A generic faithful even state: evenized ``A A* / Tr(A A*)`` for Gaussian ``A``."""
    d = algebra.ambient_dim
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    return StateFunctional(algebra, rho).even_version()


def mix(states, weights) -> StateFunctional:
    """Convex combination of states on one algebra."""
    states = list(states)
    w = np.asarray(weights, dtype=float)
    if len(states) != w.size or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector matching the states")
    alg = states[0].algebra
    if any(s.algebra is not alg for s in states):
        raise ValueError("states live on different algebras")
    return StateFunctional(alg, sum(wi * s.density for wi, s in zip(w, states)))


def evenness_residual(state: StateFunctional) -> float:
    """``max_i |phi(alpha(b_i)) - phi(b_i)| / max(1, |b_i|)``."""
    alg = state.algebra
    v = state.values
    diff = np.abs(alg.basis_map.T @ v - v)
    norms = np.maximum(np.linalg.norm(alg.basis.reshape(alg.dim, -1), axis=1), 1.0)
    return float(np.max(diff / norms))


def is_even(state: StateFunctional) -> bool:
    return evenness_residual(state) <= state.algebra.tolerance


def require_even(*states: StateFunctional) -> None:
    for s in states:
        res = evenness_residual(s)
        if res > s.algebra.tolerance:
            raise NotEven(f"state is not even (residual {res:.3e})")


def separating_even_state(algebra: GradedAlgebra) -> StateFunctional:
    """The normalised trace, an even faithful state on every algebra."""
    return StateFunctional.tracial(algebra)


def separation_witness(algebra: GradedAlgebra, a) -> float:
    """``tau(E(a* a))`` with ``tau`` the normalised trace; positive iff ``a != 0``."""
    a = np.asarray(a, dtype=complex)
    tau = separating_even_state(algebra)
    return tau(conditional_expectation_even(a.conj().T @ a, algebra)).real


# --------------------------------------------------------------------- GNS
@dataclass(frozen=True, eq=False)
class GnsData:
    """Covariant GNS triple of ``state``.

    ``rep[i]`` represents ``basis[i]``; ``implementing_unitary`` is present
    for even states only.  ``embed`` maps algebra coordinates onto GNS
    vectors (``x -> pi(x) xi``).
    """

    state: StateFunctional
    rep: np.ndarray = field(repr=False)
    cyclic_vector: np.ndarray = field(repr=False)
    implementing_unitary: np.ndarray | None = field(repr=False)
    embed: np.ndarray = field(repr=False)

    @property
    def gns_dim(self) -> int:
        return self.cyclic_vector.shape[0]

    @property
    def algebra(self) -> GradedAlgebra:
        return self.state.algebra

    def pi(self, x) -> np.ndarray:
        c = self.algebra.coords(x)
        return np.tensordot(c, self.rep, axes=1)

    def graded_space(self) -> GradedHilbert:
        if self.implementing_unitary is None:
            raise NotEven("GNS space of a non-even state carries no grading")
        return GradedHilbert(self.gns_dim, self.implementing_unitary, self.algebra.tolerance)

    def residuals(self) -> Report:
        """Reconstruction, cyclicity, homomorphism and covariance checks."""
        alg = self.algebra
        tol = alg.tolerance
        xi = self.cyclic_vector
        rep = Report()
        recon = self.rep @ xi @ xi.conj()
        rep.add(residual_check("reconstruction", float(np.max(np.abs(recon - self.state.values))), tol))
        orbit = self.rep @ xi
        deficit = self.gns_dim - la.rank(orbit.T, tol)
        rep.add(Check("cyclic", float(deficit), deficit == 0))
        d = alg.ambient_dim
        prods = (alg.basis[:, None] @ alg.basis[None, :]).reshape(-1, d, d)
        lhs = np.tensordot(alg.coords_batch(prods), self.rep, axes=1)
        rhs = (self.rep[:, None] @ self.rep[None, :]).reshape(lhs.shape)
        rep.add(residual_check("multiplicative", float(np.max(np.abs(lhs - rhs))), tol))
        adj = np.tensordot(alg.coords_batch(la.dagger(alg.basis)), self.rep, axes=1)
        rep.add(residual_check("adjoint", float(np.max(np.abs(adj - la.dagger(self.rep)))), tol))
        v = self.implementing_unitary
        if v is not None:
            eye = np.eye(self.gns_dim)
            unit = max(float(np.max(np.abs(v @ v - eye))), float(np.max(np.abs(v - v.conj().T))))
            rep.add(residual_check("covariance_unitary", unit, tol))
            alpha_rep = np.tensordot(alg.basis_map.T, self.rep, axes=1)
            cov = float(np.max(np.abs(v[None] @ self.rep @ v[None] - alpha_rep)))
            rep.add(residual_check("covariance_action", cov, tol))
            rep.add(residual_check("covariance_vector", float(np.max(np.abs(v @ xi - xi))), tol))
        return rep


def gns(state: StateFunctional) -> GnsData:
    """Covariant GNS triple from the Gram matrix ``G_ij = phi(b_i* b_j)``.

    ``G = W^H W`` with ``W`` the columns ``vec(b_j rho^{1/2})``; the SVD of
    ``W`` gives the quotient map ``J = Sigma V^H`` onto the GNS space, and
    ``pi(b_i) = J L_i J^+`` with ``L_i`` left multiplication in coordinates.
    """
    alg = state.algebra
    tol = alg.tolerance
    d = alg.ambient_dim
    m = alg.dim
    w_rho, v_rho = np.linalg.eigh(state.density)
    half = (v_rho * np.sqrt(np.clip(w_rho, 0.0, None))) @ v_rho.conj().T
    cols = la.vec(alg.basis @ half[None])
    _, s, vh = np.linalg.svd(cols, full_matrices=False)
    keep = la.rank_mask(s, tol)
    s, vh = s[keep], vh[keep]
    j = s[:, None] * vh
    j_pinv = vh.conj().T / s[None, :]
    prods = (alg.basis[:, None] @ alg.basis[None, :]).reshape(-1, d, d)
    left = alg.coords_batch(prods).reshape(m, m, m).transpose(0, 2, 1)
    rep = j[None] @ left @ j_pinv[None]
    xi = j[:, 0].copy()
    v = None
    if is_even(state):
        v = j @ alg.basis_map @ j_pinv
    return GnsData(state, rep, xi, v, j)


def has_central_support(state_or_gns) -> bool:
    """True iff the cyclic vector is also cyclic for the commutant of the representation."""
    g = state_or_gns if isinstance(state_or_gns, GnsData) else gns(state_or_gns)
    tol = g.algebra.tolerance
    comm = la.unvec(la.commutant_columns(g.rep, tol), g.gns_dim)
    orbit = comm @ g.cyclic_vector
    return la.rank(orbit.T, tol) == g.gns_dim


def image_dimension(g: GnsData) -> int:
    """Dimension of ``pi(A)``; equals ``gns_dim`` iff ``xi`` separates ``pi(A)``."""
    return la.rank(la.vec(g.rep), g.algebra.tolerance)


# ----------------------------------------------------------- product states
def product_state_fermi(omega: StateFunctional, phi: StateFunctional, product=None) -> StateFunctional:
    """The product state ``omega x phi`` on the Fermi product of the two algebras.

    ``(omega x phi)(a ⊛ b) = omega(a) phi(b)``; realised by the density
    ``rho_omega' (x) rho_phi'`` of the evenized densities.
    """
    from .fermi_tensor import build_product

    require_even(omega, phi)
    if product is None:
        product = build_product([omega.algebra, phi.algebra], "fermi")
    elif product.kind != "fermi" or product.n != 2:
        raise ValueError("product must be a two-leg Fermi product")
    elif product.factors[0] is not omega.algebra or product.factors[1] is not phi.algebra:
        raise ValueError("product factors do not match the states' algebras")
    rho = np.kron(omega.evenized_density(), phi.evenized_density())
    return StateFunctional(product.realized, rho)


def check_product_gns_equivalence(omega: StateFunctional, phi: StateFunctional, product=None) -> Report:
    """Compare the GNS triple of ``omega x phi`` with ``(H_w (x) H_p, pi_w ⊛ pi_p, xi (x) eta)``.

    Both routes give orbit vectors ``pi(a_i ⊛ b_j) xi`` indexed by the
    product basis; equal Gram matrices certify unitary equivalence, and the
    unitary ``W = O2 O1^+`` is checked to intertwine representations and
    grading unitaries.
    """
    from .fermi_tensor import build_product

    require_even(omega, phi)
    if product is None:
        product = build_product([omega.algebra, phi.algebra], "fermi")
    tol = product.realized.tolerance
    state = product_state_fermi(omega, phi, product)
    g_w, g_p = gns(omega), gns(phi)
    h_w, h_p = g_w.graded_space(), g_p.graded_space()
    ops1 = np.stack([fermi_op_product(a, b, h_w, h_p) for a in g_w.rep for b in g_p.rep])
    xi1 = np.kron(g_w.cyclic_vector, g_p.cyclic_vector)
    orbit1 = (ops1 @ xi1).T
    g2 = gns(state)
    orbit2 = (g2.rep @ g2.cyclic_vector).T

    rep = Report()
    dim1 = la.rank(orbit1, tol)
    rep.add(Check("dimension", float(abs(dim1 - g2.gns_dim)), dim1 == g2.gns_dim))
    rep.add(Check("cyclic_subspace_full", float(xi1.size - dim1), dim1 == xi1.size))
    vals1 = orbit1.T @ xi1.conj()
    rep.add(residual_check("state_values", float(np.max(np.abs(vals1 - state.values))), tol))
    gram = float(np.max(np.abs(orbit1.conj().T @ orbit1 - orbit2.conj().T @ orbit2)))
    rep.add(residual_check("gram", gram, tol))
    w = orbit2 @ np.linalg.pinv(orbit1, rcond=tol)
    if w.shape[0] == w.shape[1]:
        unit = float(np.max(np.abs(w.conj().T @ w - np.eye(w.shape[1]))))
    else:
        unit = float("inf")
    rep.add(residual_check("unitary", unit, tol))
    inter = float(np.max(np.abs(w[None] @ ops1 - g2.rep @ w[None])))
    rep.add(residual_check("intertwines_representation", inter, tol))
    v1 = np.kron(g_w.implementing_unitary, g_p.implementing_unitary)
    rep.add(residual_check("intertwines_grading", float(np.max(np.abs(w @ v1 - g2.implementing_unitary @ w))), tol))
    rep.add(residual_check("cyclic_vector", float(np.max(np.abs(w @ xi1 - g2.cyclic_vector))), tol))
    return rep
