"""Block decomposition of finite-dimensional *-algebras and the CAR(2) battery.

The battery builds two anticommuting annihilators on ``C^4``::

    a = sigma_minus (x) 1,    A = sigma_z (x) sigma_minus

and checks that the algebra generated by the spectral projections of
``s = a + a*`` and ``S = A + A*`` is a copy of ``M_2`` while the ordinary
product of the two legs is abelian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from .algebras import I2, SIGMA_Z, swap_leg
from .errors import RankDeficient
from .graded_core import (
    DEFAULT_TOLERANCE,
    GradedAlgebra,
    Grading,
    center,
    generated_algebra,
    is_commutative,
)
from .report import Check, Report, residual_check

BATTERY_TOLERANCE = 1e-12
EMBEDDINGS = ("fermi", "ordinary")

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Full matrix blocks ``(multiplicity, size)`` and their central projections."""

    blocks: list[tuple[int, int]]
    central_projections: list[np.ndarray] = field(repr=False)

    @property
    def is_factor(self) -> bool:
        return len(self.blocks) == 1

    @property
    def algebra_dim(self) -> int:
        return sum(size * size for _, size in self.blocks)


def _basis_of(algebra) -> tuple[np.ndarray, float]:
    if isinstance(algebra, GradedAlgebra):
        return algebra.basis, algebra.tolerance
    return la.as_stack(algebra), DEFAULT_TOLERANCE


def decompose(algebra, tol: float | None = None, seed: int = 0, attempts: int = 8) -> BlockDecomposition:
    """Split a unital *-algebra into full matrix blocks.

    Minimal central projections are the spectral projections of a random
    self-adjoint central element; a sample whose spectrum does not separate
    the center is redrawn.
    """
    basis, default_tol = _basis_of(algebra)
    tol = default_tol if tol is None else tol
    z = center(basis, tol, seed)
    rng = np.random.default_rng(seed)
    herm = la.hermitian_parts(z)
    projections = None
    for _ in range(attempts):
        h = np.tensordot(rng.standard_normal(herm.shape[0]), herm, axes=1)
        w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
        spread = max(1.0, float(np.max(np.abs(w))))
        groups = la.cluster_eigenvalues(w, max(np.sqrt(tol), 1e-6) * spread)
        if len(groups) == z.shape[0]:
            projections = [v[:, g] @ v[:, g].conj().T for g in groups]
            break
    if projections is None:
        raise RankDeficient(f"could not separate {z.shape[0]} central summands")
    blocks = []
    for p in projections:
        dim_block = la.rank(la.vec(p[None] @ basis), tol)
        size = int(round(np.sqrt(dim_block)))
        rank_p = int(round(np.trace(p).real))
        blocks.append((rank_p // max(size, 1), size))
    return BlockDecomposition(blocks, projections)


def block_algebra(algebra, projection: np.ndarray, tol: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Basis (identity first) of ``z A`` compressed to the range of ``z``."""
    basis, _ = _basis_of(algebra)
    w, v = np.linalg.eigh(projection)
    frame = v[:, w > 0.5]
    compressed = frame.conj().T[None] @ basis @ frame[None]
    return generated_algebra(compressed, frame.shape[1], tol)


# ------------------------------------------------------------ CAR fixture
@dataclass(frozen=True, eq=False)
class CarFixture:
    """Two annihilators on ``C^4`` and the derived projections."""

    a: np.ndarray
    A: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return self.a + self.a.conj().T

    @property
    def S(self) -> np.ndarray:
        return self.A + self.A.conj().T

    @property
    def p(self) -> np.ndarray:
        return 0.5 * (np.eye(4) + self.s)

    @property
    def q(self) -> np.ndarray:
        return 0.5 * (np.eye(4) - self.s)

    @property
    def P(self) -> np.ndarray:
        return 0.5 * (np.eye(4) + self.S)

    @property
    def Q(self) -> np.ndarray:
        return 0.5 * (np.eye(4) - self.S)

    @property
    def parity(self) -> np.ndarray:
        return np.kron(SIGMA_Z, SIGMA_Z)

    def matrix_units(self) -> dict[tuple[int, int], np.ndarray]:
        p, q, S = self.p, self.q, self.S
        return {(1, 1): p, (2, 2): q, (1, 2): p @ S, (2, 1): q @ S}


def car_fixture(embedding: str = "fermi", noise: float = 0.0, seed: int = 0) -> CarFixture:
    if embedding not in EMBEDDINGS:
        raise ValueError(f"embedding must be one of {EMBEDDINGS}")
    a = np.kron(SIGMA_MINUS, I2)
    A = np.kron(SIGMA_Z if embedding == "fermi" else I2, SIGMA_MINUS)
    if noise:
        rng = np.random.default_rng(seed)
        a = a + noise * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        A = A + noise * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    return CarFixture(a, A)


def car_leg_algebras(fix: CarFixture, tol: float = DEFAULT_TOLERANCE) -> tuple[GradedAlgebra, GradedAlgebra]:
    """The abelian algebras ``span{p, q}`` and ``span{P, Q}`` inside the CAR ambient."""
    grading = Grading.ambient(fix.parity)
    eye = np.eye(4, dtype=complex)
    return GradedAlgebra(4, [eye, fix.s], grading, tol), GradedAlgebra(4, [eye, fix.S], grading, tol)


def run_counterexample(noise: float = 0.0, seed: int = 0, embedding: str = "fermi",
                       tol: float = BATTERY_TOLERANCE) -> Report:
    """Seven checks separating the Fermi product of two abelian legs from the ordinary one.

    Structural checks (dimensions, commutativity, block counts) report the
    number of violated conditions as their residual.
    """
    from .fermi_tensor import build_product
    from .states import StateFunctional, gns, product_state_fermi

    fix = car_fixture(embedding, noise, seed)
    rank_tol = max(tol, DEFAULT_TOLERANCE)
    rep = Report()
    eye = np.eye(4)

    comm = fix.p @ fix.P - fix.P @ fix.p
    rep.add(residual_check("commutator_identity", float(np.max(np.abs(comm - 0.5 * fix.s @ fix.S))), tol))

    units = fix.matrix_units()
    worst = float(np.max(np.abs(units[1, 1] + units[2, 2] - eye)))
    for (i, j), x in units.items():
        for (k, l), y in units.items():
            expected = units[i, l] if j == k else np.zeros((4, 4))
            worst = max(worst, float(np.max(np.abs(x @ y - expected))))
    rep.add(residual_check("matrix_units", worst, tol))

    gen = generated_algebra(np.stack([fix.p, fix.P]), 4, rank_tol)
    z_gen = center(gen, rank_tol)
    violations = abs(gen.shape[0] - 4) + abs(z_gen.shape[0] - 1) + int(is_commutative(gen, rank_tol))
    rep.add(Check("fermi_product_factor", float(violations), violations == 0))

    leg = swap_leg(rank_tol)
    ordinary = build_product([leg, leg], "ordinary").realized
    violations = abs(ordinary.dim - 4) + int(not is_commutative(ordinary.basis, rank_tol))
    rep.add(Check("ordinary_product_abelian", float(violations), violations == 0))

    phi = StateFunctional.tracial(leg)
    product = build_product([leg, leg], embedding)
    if embedding == "fermi":
        omega = product_state_fermi(phi, phi, product)
    else:
        omega = StateFunctional(product.realized, np.kron(phi.density, phi.density))
    half_trace = max(abs(np.trace(omega.density @ x) - (0.5 if i == j else 0.0)) for (i, j), x in units.items())
    rep.add(residual_check("product_state_trace", float(half_trace), tol))

    alg_a, alg_b = car_leg_algebras(fix, rank_tol)
    z_a, z_b = center(alg_a.basis, rank_tol), center(alg_b.basis, rank_tol)
    images = (z_a[:, None] @ z_b[None, :]).reshape(-1, 4, 4)
    span_dim = la.rank(la.vec(images), rank_tol)
    z_m = center(gen, rank_tol)
    same = span_dim == z_m.shape[0]
    rep.add(Check("center_mismatch", float(same), not same))

    blocks_product = len(decompose(gns(omega).rep, rank_tol).blocks)
    blocks_leg = len(decompose(gns(phi).rep, rank_tol).blocks)
    violations = abs(blocks_product - 1) + int(blocks_leg == 1)
    rep.add(Check("gns_factor", float(violations), violations == 0))
    return rep
