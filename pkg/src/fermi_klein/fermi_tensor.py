"""n-fold Fermi and ordinary products of graded algebras.

The realised product lives on the Kronecker space ``C^{d_0} (x) ... (x)
C^{d_{n-1}}`` (leg 0 is the slow index).  Its basis is the ordered family of
simple tensors ``b_{i_0} ⊛ ... ⊛ b_{i_{n-1}}`` (identity first), built left
associatively with :func:`fermi_op_product` or plain Kronecker products.

Coordinates in that basis are computed without a global pseudo-inverse.  In
the eigenframes of the leg grading unitaries a Fermi simple tensor differs
from the Kronecker simple tensor with the same legs only by an entrywise sign
pattern, so both directions reduce to legwise coordinate maps.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from . import _linalg as la
from .errors import InvalidPermutation, ShapeError
from .graded_core import GradedAlgebra, Grading, GradingNotInner
from .states import StateFunctional, require_even

KINDS = ("fermi", "ordinary")
SOFT_MAX_LEGS = 6


def _kron_all(mats):
    return reduce(np.kron, mats, np.ones((1, 1), dtype=complex))


def _batched_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All pairwise Kronecker products, ``a`` index slow."""
    p, n1, _ = a.shape
    q, n2, _ = b.shape
    out = np.einsum("aij,bkl->abikjl", a, b)
    return out.reshape(p * q, n1 * n2, n1 * n2)


def _is_diagonal(u: np.ndarray) -> bool:
    return bool(np.all(u == np.diag(np.diag(u))))


def _leg_frame(u: np.ndarray) -> tuple[np.ndarray | None, np.ndarray]:
    """Eigenframe (``None`` for the standard one) and odd mask of a grading unitary."""
    if _is_diagonal(u):
        return None, np.diag(u).real < 0
    w, q = np.linalg.eigh(0.5 * (u + u.conj().T))
    return q, w < 0


class _ProductCoords:
    """Coordinates of the realised product via legwise coordinate maps."""

    def __init__(self, factors: Sequence[GradedAlgebra], fermi: bool, frames, odd):
        self.factors = list(factors)
        self.dims = [f.ambient_dim for f in factors]
        self.ms = [f.dim for f in factors]
        self.n = len(factors)
        self.big = int(np.prod(self.dims))
        self.fermi = fermi
        self.rotation = None
        self.signs = None
        if fermi:
            if any(q is not None for q in frames):
                self.rotation = _kron_all([np.eye(d) if q is None else q for q, d in zip(frames, self.dims)])
            self.signs = _fermi_sign_mask(self.dims, odd)

    def flip(self, xs: np.ndarray) -> np.ndarray:
        """Exchange Fermi and Kronecker simple tensors (an involution)."""
        if not self.fermi:
            return xs
        q = self.rotation
        if q is None:
            return xs * self.signs
        return q @ ((q.conj().T @ xs @ q) * self.signs) @ q.conj().T

    def coords_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = self.flip(la.as_stack(xs))
        k = xs.shape[0]
        n = self.n
        t = xs.reshape((k, *self.dims, *self.dims))
        order = [0] + [a for leg in range(n) for a in (1 + leg, 1 + n + leg)]
        t = t.transpose(order)
        for leg, f in enumerate(self.factors):
            d = self.dims[leg]
            t = np.moveaxis(t, (1 + leg, 2 + leg), (-2, -1))
            lead = t.shape[:-2]
            c = f.coords_batch(t.reshape(-1, d, d)).reshape(*lead, f.dim)
            t = np.moveaxis(c, -1, 1 + leg)
        return t.reshape(k, -1)

    def combine_batch(self, cs: np.ndarray) -> np.ndarray:
        cs = np.atleast_2d(np.asarray(cs, dtype=complex))
        k = cs.shape[0]
        n = self.n
        t = cs.reshape((k, *self.ms))
        for leg, f in enumerate(self.factors):
            pos = 1 + 2 * leg
            t = np.moveaxis(t, pos, -1)
            lead = t.shape[:-1]
            mats = f.combine_batch(t.reshape(-1, f.dim)).reshape(*lead, self.dims[leg], self.dims[leg])
            t = np.moveaxis(mats, (-2, -1), (pos, pos + 1))
        order = [0] + [1 + 2 * leg for leg in range(n)] + [2 + 2 * leg for leg in range(n)]
        xs = t.transpose(order).reshape(k, self.big, self.big)
        return self.flip(xs)


def _fermi_sign_mask(dims, odd) -> np.ndarray:
    """Entry signs turning Kronecker simple tensors into Fermi ones (leg eigenframes).

    Entry ``(i, j)`` of leg ``k`` has grade ``odd_k(i) xor odd_k(j)``; the
    Fermi product multiplies it by ``U_k^{s_k}`` on the right, where ``s_k``
    is the total grade of the later legs.
    """
    big = int(np.prod(dims))
    idx = np.array(np.unravel_index(np.arange(big), dims))
    parity = np.array([odd[k][idx[k]] for k in range(len(dims))], dtype=np.int64)
    grade = parity[:, :, None] ^ parity[:, None, :]
    later = np.zeros((big, big), dtype=np.int64)
    exponent = np.zeros((big, big), dtype=np.int64)
    for k in reversed(range(len(dims))):
        exponent += later * parity[k][None, :]
        later ^= grade[k]
    return np.where(exponent % 2, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map between two algebras, stored on basis coordinates."""

    source: GradedAlgebra
    target: GradedAlgebra
    matrix: np.ndarray

    def apply_coords(self, c) -> np.ndarray:
        return self.matrix @ c

    def __call__(self, x) -> np.ndarray:
        return self.target.combine(self.matrix @ self.source.coords(x))

    def images(self) -> np.ndarray:
        """Images of every source basis element."""
        return self.target.combine_batch(self.matrix.T)

    def compose(self, other: "LinearMap") -> "LinearMap":
        """``self ∘ other``."""
        return LinearMap(other.source, self.target, self.matrix @ other.matrix)

    def transpose_state(self, psi: StateFunctional) -> StateFunctional:
        """``psi ∘ self`` as a state on the source."""
        return StateFunctional.from_values(self.source, self.matrix.T @ psi.values)


@dataclass(frozen=True, eq=False)
class ProductAlgebra:
    """Realised n-fold Fermi or ordinary product of graded algebras."""

    kind: str
    factors: tuple
    realized: GradedAlgebra
    leg_unitaries: tuple

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> list[int]:
        return [f.ambient_dim for f in self.factors]

    @property
    def grading_unitary(self) -> np.ndarray:
        return self.realized.grading.data

    def _check_leg(self, k: int) -> GradedAlgebra:
        if not 0 <= k < self.n:
            raise IndexError(f"factor index {k} out of range for {self.n} legs")
        return self.factors[k]

    def embed(self, k: int, b) -> np.ndarray:
        """``1 ⊛ ... ⊛ b ⊛ ... ⊛ 1`` with ``b`` in slot ``k``."""
        f = self._check_leg(k)
        b = np.asarray(b, dtype=complex)
        f.coords(b)
        before = int(np.prod(self.dims[:k]))
        after = int(np.prod(self.dims[k + 1:]))
        if self.kind == "ordinary":
            return np.kron(np.kron(np.eye(before), b), np.eye(after))
        u = self.leg_unitaries[k]
        conj = u @ b @ u
        b_plus, b_minus = 0.5 * (b + conj), 0.5 * (b - conj)
        u_before = _kron_all(self.leg_unitaries[:k])
        out = np.kron(np.kron(np.eye(before), b_plus), np.eye(after))
        return out + np.kron(np.kron(u_before, b_minus), np.eye(after))

    @cached_property
    def embedding(self) -> list[np.ndarray]:
        """Per leg, the stack of embedded leg basis elements."""
        return [np.stack([self.embed(k, b) for b in f.basis]) for k, f in enumerate(self.factors)]

    @cached_property
    def generators(self) -> np.ndarray:
        return np.concatenate([e[1:] for e in self.embedding] or [np.eye(self.realized.ambient_dim)[None]])

    def simple_tensor(self, legs) -> np.ndarray:
        """``x_0 ⊛ ... ⊛ x_{n-1}`` for leg elements ``x_k`` (product of embeddings)."""
        if len(legs) != self.n:
            raise ShapeError(f"expected {self.n} leg elements")
        out = np.eye(self.realized.ambient_dim, dtype=complex)
        for k, x in enumerate(legs):
            out = out @ self.embed(k, x)
        return out

    def index(self, multi) -> int:
        return int(np.ravel_multi_index(tuple(multi), [f.dim for f in self.factors]))


def _product_basis(factors, unitaries, fermi: bool) -> np.ndarray:
    basis = factors[0].basis.astype(complex)
    u_left = unitaries[0]
    for f, u in zip(factors[1:], unitaries[1:]):
        t = f.basis
        if fermi:
            conj = u[None] @ t @ u[None]
            plus, minus = 0.5 * (t + conj), 0.5 * (t - conj)
            basis = _batched_kron(basis, plus) + _batched_kron(basis @ u_left[None], minus)
        else:
            basis = _batched_kron(basis, t)
        u_left = np.kron(u_left, u)
    return basis


def build_product(factors: Sequence[GradedAlgebra], kind: str = "fermi") -> ProductAlgebra:
    """Realise ``⊛_k factors[k]`` (``kind="fermi"``) or the ordinary Kronecker product.

    The realised grading is the ambient unitary ``(x)_k U_k``; when every
    factor is innerly graded the product inner unit ``(x)_k u_k`` is attached.
    """
    kind = kind.lower()
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    factors = tuple(factors)
    if not factors:
        raise ValueError("need at least one factor")
    if len(factors) > SOFT_MAX_LEGS:
        warnings.warn(f"{len(factors)} legs exceed the soft cap of {SOFT_MAX_LEGS}", stacklevel=2)
    tol = max(f.tolerance for f in factors)
    unitaries = tuple(f.implementing_unitary for f in factors)
    fermi = kind == "fermi"
    basis = _product_basis(factors, unitaries, fermi)
    frames = [_leg_frame(u) for u in unitaries]
    structure = _ProductCoords(factors, fermi, [q for q, _ in frames], [o for _, o in frames])
    big_u = _kron_all(unitaries)
    gmap = _kron_all([f.basis_map for f in factors])
    inner = None
    try:
        inner = _kron_all([f.inner_unitary for f in factors])
    except GradingNotInner:
        pass
    realized = GradedAlgebra(
        big_u.shape[0], basis, Grading("ambient", big_u, basis_map=gmap), tol, inner, structure
    )
    return ProductAlgebra(kind, factors, realized, unitaries)


def build_product_n(factor: GradedAlgebra, n: int, kind: str = "fermi") -> ProductAlgebra:
    if n < 1:
        raise ValueError("n must be at least 1")
    return build_product([factor] * n, kind)


# ------------------------------------------------------------ product states
def product_state_n(phi: StateFunctional, n: int, kind: str = "fermi",
                    product: ProductAlgebra | None = None) -> StateFunctional:
    """``phi x ... x phi`` on the n-fold product; the density is the Kronecker power."""
    require_even(phi)
    if product is None:
        product = build_product_n(phi.algebra, n, kind)
    elif product.n != n or any(f is not phi.algebra for f in product.factors):
        raise ValueError("product legs do not match the state's algebra")
    rho = _kron_all([phi.evenized_density()] * n)
    return StateFunctional(product.realized, rho)


def product_state(states: Sequence[StateFunctional], product: ProductAlgebra) -> StateFunctional:
    """Product of (possibly different) even leg states."""
    require_even(*states)
    if len(states) != product.n:
        raise ValueError("one state per leg required")
    return StateFunctional(product.realized, _kron_all([s.evenized_density() for s in states]))


# --------------------------------------------------------- permutation action
def _check_perm(perm, n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise InvalidPermutation(f"{perm} is not a permutation of {n} letters")
    return perm


def permutation_unitary(product: ProductAlgebra, perm) -> np.ndarray:
    """Unitary moving leg ``k`` to slot ``perm[k]``.

    For the Fermi kind a product of leg eigenvectors picks up the Koszul sign
    ``(-1)^{#odd pairs whose order is reversed}``.
    """
    n = product.n
    perm = _check_perm(perm, n)
    f0 = product.factors[0]
    for f, u in zip(product.factors, product.leg_unitaries):
        same = f.ambient_dim == f0.ambient_dim and f.dim == f0.dim
        if f is not f0 and not (same and np.allclose(f.basis, f0.basis) and np.allclose(u, product.leg_unitaries[0])):
            raise InvalidPermutation("legs must be identical to be permuted")
    d = f0.ambient_dim
    big = d ** n
    q, odd = _leg_frame(product.leg_unitaries[0])
    idx = np.array(np.unravel_index(np.arange(big), [d] * n))
    new = np.empty_like(idx)
    new[list(perm)] = idx
    target = np.ravel_multi_index(tuple(new), [d] * n)
    sign = np.ones(big)
    if product.kind == "fermi":
        par = odd[idx]
        flips = np.zeros(big, dtype=np.int64)
        for k in range(n):
            for l in range(k + 1, n):
                if perm[k] > perm[l]:
                    flips += par[k] & par[l]
        sign = np.where(flips % 2, -1.0, 1.0)
    w = np.zeros((big, big), dtype=complex)
    w[target, np.arange(big)] = sign
    if product.kind == "fermi" and q is not None:
        qq = _kron_all([q] * n)
        w = qq @ w @ qq.conj().T
    return w


def permutation_action(product: ProductAlgebra, perm) -> LinearMap:
    """The automorphism ``x -> W x W*`` of the realised product."""
    w = permutation_unitary(product, perm)
    alg = product.realized
    images = w[None] @ alg.basis @ w.conj().T[None]
    return LinearMap(alg, alg, alg.coords_batch(images).T)


def _test_permutations(n: int):
    if n <= 4:
        return list(itertools.permutations(range(n)))
    out = []
    for k in range(n - 1):
        p = list(range(n))
        p[k], p[k + 1] = p[k + 1], p[k]
        out.append(tuple(p))
    return out


def symmetry_residuals(state: StateFunctional, product: ProductAlgebra) -> dict[tuple[int, ...], float]:
    """``max_i |phi(theta(b_i)) - phi(b_i)|`` per tested permutation."""
    if state.algebra is not product.realized:
        raise ValueError("state must live on the realised product")
    v = state.values
    out = {}
    for perm in _test_permutations(product.n):
        theta = permutation_action(product, perm)
        out[perm] = float(np.max(np.abs(theta.matrix.T @ v - v)))
    return out


def is_symmetric(state: StateFunctional, product: ProductAlgebra) -> bool:
    tol = product.realized.tolerance
    return all(r <= tol for r in symmetry_residuals(state, product).values())


# --------------------------------------------------------- even expectation
def expectation_even_product(product: ProductAlgebra) -> LinearMap:
    """Legwise ``E = (id + alpha) / 2`` on the realised product."""
    if product.kind != "fermi":
        raise ValueError("the even product expectation is defined on the Fermi product")
    mats = [0.5 * (np.eye(f.dim) + f.basis_map) for f in product.factors]
    return LinearMap(product.realized, product.realized, _kron_all(mats))


def even_product_image(product: ProductAlgebra) -> np.ndarray:
    """Spanning stack of the range of the even product expectation."""
    e = expectation_even_product(product)
    cols = la.orthonormal_columns(e.matrix, product.realized.tolerance)
    return product.realized.combine_batch(cols.T)


__all__ = [
    "KINDS",
    "LinearMap",
    "ProductAlgebra",
    "build_product",
    "build_product_n",
    "even_product_image",
    "expectation_even_product",
    "is_symmetric",
    "permutation_action",
    "permutation_unitary",
    "product_state",
    "product_state_n",
    "symmetry_residuals",
]
