"""The Klein transformation between Fermi and ordinary products.

For a two-leg Fermi product whose first leg is graded by an inner unitary
``u``, the map ``sigma(a ⊛ b) = a ⊛ b+ + (a u) ⊛ b-`` turns ``1 ⊛ b`` into
elements commuting with ``a ⊛ 1``.  Sending the words ``(a ⊛ 1) sigma(1 ⊛ b)``
to ``a (x) b`` gives a *-isomorphism ``kappa`` onto the ordinary product.
The n-leg version is built inductively, treating the first ``n - 1`` legs as
one innerly graded algebra with unit ``u (x) ... (x) u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from .errors import GradingNotInner, RankDeficient
from .fermi_tensor import LinearMap, ProductAlgebra, build_product, build_product_n, product_state_n
from .graded_core import GradedAlgebra, generated_algebra, span_residual
from .report import Check, Report, residual_check
from .states import StateFunctional, mix, random_even_state

FULL_PAIR_LIMIT = 256


@dataclass(frozen=True, eq=False)
class KleinMap:
    """``kappa`` on realised coordinates: column ``i`` holds ``kappa(x_i)`` in target coordinates."""

    source: ProductAlgebra
    target: ProductAlgebra
    matrix: np.ndarray = field(repr=False)
    inner_unitaries: tuple = field(repr=False)
    lower: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def linear_map(self) -> LinearMap:
        return LinearMap(self.source.realized, self.target.realized, self.matrix)

    def __call__(self, x) -> np.ndarray:
        return self.linear_map(x)


def _require_two_leg_fermi(product: ProductAlgebra) -> None:
    if product.kind != "fermi" or product.n != 2:
        raise ValueError("expected a two-leg Fermi product")


def klein_sigma(product: ProductAlgebra) -> LinearMap:
    """``sigma`` on the realised two-leg Fermi product.

    Raises:
        GradingNotInner: the first leg has no inner grading unitary.
    """
    _require_two_leg_fermi(product)
    a, b = product.factors
    u = a.inner_unitary
    right_u = a.coords_batch(a.basis @ u[None]).T
    eye_b = np.eye(b.dim)
    plus = 0.5 * (eye_b + b.basis_map)
    minus = 0.5 * (eye_b - b.basis_map)
    mat = np.kron(np.eye(a.dim), plus) + np.kron(right_u, minus)
    return LinearMap(product.realized, product.realized, mat)


def sigma_generators(product: ProductAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """Stacks ``a ⊛ 1`` and ``sigma(1 ⊛ b)`` over the leg bases."""
    _require_two_leg_fermi(product)
    a, b = product.factors
    u = a.inner_unitary
    left = product.embedding[0]
    v = b.implementing_unitary
    right = []
    for y in b.basis:
        conj = v @ y @ v
        right.append(product.simple_tensor([a.identity, 0.5 * (y + conj)])
                     + product.simple_tensor([u, 0.5 * (y - conj)]))
    return left, np.stack(right)


def build_klein(product_fermi: ProductAlgebra, product_ordinary: ProductAlgebra) -> KleinMap:
    """``kappa``: words ``(a_i ⊛ 1) sigma(1 ⊛ b_j)`` go to ``a_i (x) b_j``.

    Raises:
        GradingNotInner: first leg not innerly graded.
        RankDeficient: the words do not span the source.
    """
    _require_two_leg_fermi(product_fermi)
    if product_ordinary.kind != "ordinary" or product_ordinary.n != 2:
        raise ValueError("target must be a two-leg ordinary product")
    fa, fb = product_fermi.factors
    oa, ob = product_ordinary.factors
    if (fa.dim, fb.dim, fa.ambient_dim, fb.ambient_dim) != (oa.dim, ob.dim, oa.ambient_dim, ob.ambient_dim):
        raise ValueError("Fermi and ordinary products must share their legs")
    left, right = sigma_generators(product_fermi)
    d = product_fermi.realized.ambient_dim
    words = (left[:, None] @ right[None, :]).reshape(-1, d, d)
    src = product_fermi.realized
    w, res = src.membership_residuals(words)
    if res.max() > src.tolerance:
        raise RankDeficient(f"words leave the source algebra (residual {res.max():.3e})")
    w = w.T
    deficit = w.shape[0] - la.rank(w, src.tolerance)
    if deficit:
        raise RankDeficient(f"word map misses {deficit} directions of the source")
    # words map to the ordinary simple tensors, whose coordinates are the identity
    mat = np.linalg.inv(w)
    return KleinMap(product_fermi, product_ordinary, mat, (fa.inner_unitary,))


def klein_iterated(factor: GradedAlgebra, n: int) -> KleinMap:
    """``kappa_n`` from the n-fold Fermi product onto the n-fold ordinary product.

    ``kappa_n = (kappa_{n-1} (x) id) ∘ kappa_{A, B}`` where ``A`` is the
    realised (n-1)-fold Fermi product, graded innerly by ``u (x) ... (x) u``.
    """
    if n < 2:
        raise ValueError("the Klein transformation needs at least two legs")
    _ = factor.inner_unitary  # raises GradingNotInner
    mb = factor.dim
    mat = np.eye(mb, dtype=complex)
    units = []
    prev = None
    for k in range(2, n + 1):
        lower = build_product_n(factor, k - 1, "fermi").realized
        step = build_klein(build_product([lower, factor], "fermi"), build_product([lower, factor], "ordinary"))
        units.append(lower.inner_unitary)
        prev = mat
        mat = np.kron(mat, np.eye(mb)) @ step.matrix
    source = build_product_n(factor, n, "fermi")
    target = build_product_n(factor, n, "ordinary")
    return KleinMap(source, target, mat, tuple(units), prev)


def klein_transpose(kmap: KleinMap | LinearMap, psi: StateFunctional) -> StateFunctional:
    """``psi ∘ kappa`` as a state on the Fermi product."""
    lm = kmap.linear_map if isinstance(kmap, KleinMap) else kmap
    if psi.algebra is not lm.target:
        raise ValueError("state must live on the target algebra of the map")
    return lm.transpose_state(psi)


# ---------------------------------------------------------------- battery
def _mult_residual(kmap: KleinMap) -> float:
    src = kmap.source.realized
    tgt = kmap.target.realized
    m = src.dim
    k = kmap.matrix
    images = tgt.combine_batch(k.T)
    if m <= FULL_PAIR_LIMIT:
        left_idx = np.arange(m)
    else:
        # embedded leg basis elements generate the algebra
        left_idx = np.unique([kmap.source.index([0] * leg + [i] + [0] * (kmap.n - leg - 1))
                              for leg in range(kmap.n) for i in range(kmap.source.factors[leg].dim)])
    worst = 0.0
    for i in left_idx:
        prods = src.basis[i][None] @ src.basis
        lhs = tgt.combine_batch((k @ src.coords_batch(prods).T).T)
        rhs = images[i][None] @ images
        scale = np.maximum(np.linalg.norm(images[i]) * np.linalg.norm(images.reshape(m, -1), axis=1), 1.0)
        worst = max(worst, float(np.max(np.linalg.norm((lhs - rhs).reshape(m, -1), axis=1) / scale)))
    return worst


def default_test_states(factor: GradedAlgebra, count: int = 3, seed: int = 0) -> list[StateFunctional]:
    rng = np.random.default_rng(seed)
    states = [StateFunctional.tracial(factor)]
    states += [random_even_state(factor, rng) for _ in range(max(count - 1, 0))]
    return states


def verify_klein(kmap: KleinMap, states=None, seed: int = 0) -> Report:
    """Residual battery for a Klein map; never raises on a failed check.

    Bijectivity is reported as the number of missing rank directions.
    ``states`` are even states on the (common) leg algebra; they drive the
    product-state and affinity checks.
    """
    if kmap.n < 2:
        raise ValueError("Klein maps need at least two legs")
    src, tgt = kmap.source.realized, kmap.target.realized
    tol = src.tolerance
    k = kmap.matrix
    m = src.dim
    rep = Report()

    deficit = m - la.rank(k, tol)
    rep.add(Check("bijectivity", float(deficit), deficit == 0))
    rep.add(residual_check("multiplicativity", _mult_residual(kmap), tol))

    images = tgt.combine_batch(k.T)
    adj = tgt.combine_batch((k @ src.coords_batch(la.dagger(src.basis)).T).T)
    scale = max(1.0, float(np.max(np.linalg.norm(images.reshape(m, -1), axis=1))))
    rep.add(residual_check("star_preservation", float(np.max(np.abs(adj - la.dagger(images)))) / scale, tol))
    equi = float(np.max(np.abs(k @ src.basis_map - tgt.basis_map @ k)))
    rep.add(residual_check("grading_equivariance", equi, tol))

    legs = kmap.source.factors
    if all(f is legs[0] for f in legs):
        factor = legs[0]
        if states is None:
            states = default_test_states(factor, seed=seed)
        worst = 0.0
        transposed = []
        targets = []
        for phi in states:
            psi = product_state_n(phi, kmap.n, "ordinary", kmap.target)
            fermi = product_state_n(phi, kmap.n, "fermi", kmap.source)
            pulled = k.T @ psi.values
            worst = max(worst, float(np.max(np.abs(pulled - fermi.values))))
            transposed.append(pulled)
            targets.append(psi)
        rep.add(residual_check("product_state_preservation", worst, tol))
        if len(targets) >= 2:
            lam = float(np.random.default_rng(seed).uniform(0.1, 0.9))
            mixed = mix(targets[:2], [lam, 1 - lam])
            lhs = klein_transpose(kmap, mixed).values
            rhs = lam * transposed[0] + (1 - lam) * transposed[1]
            rep.add(residual_check("affinity", float(np.max(np.abs(lhs - rhs))), tol))

    lower = kmap.lower if kmap.lower is not None else np.eye(legs[0].dim)
    rep.add(residual_check("compatibility", compatibility_residual(kmap, lower), tol))
    return rep


def compatibility_residual(kmap: KleinMap, lower: np.ndarray) -> float:
    """``max_x |kappa_n(x ⊛ 1) - kappa_{n-1}(x) (x) 1|`` in target coordinates."""
    mb = kmap.source.factors[-1].dim
    m_low = lower.shape[1]
    cols = np.arange(m_low) * mb
    e0 = np.zeros((mb, 1))
    e0[0] = 1.0
    return float(np.max(np.abs(kmap.matrix[:, cols] - np.kron(lower, e0))))


def sigma_span_residual(product: ProductAlgebra) -> float:
    """Distance between the algebra generated by ``a ⊛ 1``, ``sigma(1 ⊛ b)`` and the product."""
    left, right = sigma_generators(product)
    alg = product.realized
    gen = generated_algebra(np.concatenate([left, right]), alg.ambient_dim, alg.tolerance)
    return span_residual(gen, alg.basis, alg.tolerance)


__all__ = [
    "GradingNotInner",
    "KleinMap",
    "build_klein",
    "compatibility_residual",
    "default_test_states",
    "klein_iterated",
    "klein_sigma",
    "klein_transpose",
    "sigma_generators",
    "sigma_span_residual",
    "verify_klein",
]
