"""Dense span arithmetic on stacks of square matrices.

Matrices are flattened row-major, so a stack of shape ``(k, d, d)`` becomes a
``(d*d, k)`` column matrix.  Every rank decision keeps singular values above
``tol * sigma_max``.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

_CHUNK_ROWS = 8192


def as_stack(mats) -> np.ndarray:
    arr = np.asarray(mats, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None]
    return arr


def vec(mats) -> np.ndarray:
    arr = as_stack(mats)
    return arr.reshape(arr.shape[0], -1).T


def unvec(cols: np.ndarray, d: int) -> np.ndarray:
    return np.ascontiguousarray(cols.T).reshape(-1, d, d)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def rank_mask(s: np.ndarray, tol: float, floor: float = 0.0) -> np.ndarray:
    """Singular values above ``tol * max(sigma_max, floor)``.

    ``floor`` is the natural scale of the inputs; it keeps an all-but-zero
    matrix from being read as full rank.
    """
    top = max(float(s[0]) if s.size else 0.0, floor)
    if top <= 0.0:
        return np.zeros(s.shape, dtype=bool)
    return s > tol * top


def orthonormal_columns(cols: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the column span of ``cols``."""
    if cols.shape[1] == 0:
        return cols.copy()
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, rank_mask(s, tol)]


def rank(cols: np.ndarray, tol: float) -> int:
    if cols.size == 0:
        return 0
    s = np.linalg.svd(cols, compute_uv=False)
    return int(rank_mask(s, tol).sum())


def extend_orthonormal(q: np.ndarray, cand: np.ndarray, tol: float) -> np.ndarray:
    """New orthonormal directions of ``cand`` outside span(q).

    Candidates are normalised first, so ``tol`` acts as an absolute threshold
    on the unit-scale residuals.
    """
    norms = np.linalg.norm(cand, axis=0)
    # parts at rounding level would be blown up by the normalisation below
    keep = norms > 1e-12 * max(float(norms.max(initial=0.0)), 1e-300)
    if not norms.size or not keep.any():
        return np.zeros((cand.shape[0], 0), dtype=complex)
    c = cand[:, keep] / norms[keep]
    if q.shape[1]:
        c = c - q @ (q.conj().T @ c)
        c = c - q @ (q.conj().T @ c)
    u, s, _ = np.linalg.svd(c, full_matrices=False)
    return u[:, s > tol]


def projection_residuals(q: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Norms of the components of ``cols`` orthogonal to orthonormal ``q``."""
    r = cols - q @ (q.conj().T @ cols)
    return np.linalg.norm(r, axis=0)


def null_space_stacked(blocks: Iterable[np.ndarray], ncols: int, tol: float, floor: float = 0.0) -> np.ndarray:
    """Null space of the vertical stack of ``blocks`` without forming it.

    The R factor is accumulated chunk by chunk; the returned columns are an
    orthonormal basis of the kernel.  See :func:`rank_mask` for ``floor``.
    """
    r = np.zeros((0, ncols), dtype=complex)
    pending: list[np.ndarray] = []
    rows = 0
    for blk in blocks:
        pending.append(np.asarray(blk, dtype=complex).reshape(-1, ncols))
        rows += pending[-1].shape[0]
        if rows >= _CHUNK_ROWS:
            r = np.linalg.qr(np.vstack([r, *pending]), mode="r")
            pending, rows = [], 0
    if pending:
        r = np.linalg.qr(np.vstack([r, *pending]), mode="r")
    if r.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = np.linalg.svd(r, full_matrices=True)
    full = np.zeros(ncols)
    full[: s.size] = s
    return vh.conj().T[:, ~rank_mask(full, tol, floor)]


def span_contains(q: np.ndarray, cols: np.ndarray, tol: float) -> float:
    """Worst relative residual of ``cols`` against orthonormal ``q``."""
    if cols.shape[1] == 0:
        return 0.0
    res = projection_residuals(q, cols)
    scale = np.maximum(np.linalg.norm(cols, axis=0), 1.0)
    return float(np.max(res / scale))


def span_distance(a: np.ndarray, b: np.ndarray, tol: float) -> float:
    """Mutual-containment residual of two column spans (0 for equal spans)."""
    qa = orthonormal_columns(a, tol)
    qb = orthonormal_columns(b, tol)
    if qa.shape[1] != qb.shape[1]:
        return float("inf")
    return max(span_contains(qa, b, tol), span_contains(qb, a, tol))


def intersect_spans(qa: np.ndarray, qb: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of span(qa) ∩ span(qb) for orthonormal inputs."""
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.zeros((qa.shape[0], 0), dtype=complex)
    m = np.hstack([qa, -qb])
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    full = np.zeros(m.shape[1])
    full[: s.size] = s
    coeffs = vh.conj().T[:, ~rank_mask(full, tol)]
    return orthonormal_columns(qa @ coeffs[: qa.shape[1]], tol)


def cluster_eigenvalues(w: np.ndarray, gap: float) -> list[np.ndarray]:
    """Group sorted eigenvalues whose neighbours differ by at most ``gap``."""
    groups: list[list[int]] = [[0]] if w.size else []
    for i in range(1, w.size):
        if w[i] - w[i - 1] > gap:
            groups.append([i])
        else:
            groups[-1].append(i)
    return [np.array(g) for g in groups]


def hermitian_parts(mats: np.ndarray) -> np.ndarray:
    """Real-linear spanning set of the self-adjoint part of span(mats)."""
    h = 0.5 * (mats + dagger(mats))
    k = -0.5j * (mats - dagger(mats))
    return np.concatenate([h, k])


def random_hermitian(mats: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    herm = hermitian_parts(mats)
    norms = np.linalg.norm(herm.reshape(herm.shape[0], -1), axis=1)
    # parts at rounding level would be blown up by the normalisation below
    keep = norms > 1e-12 * max(float(norms.max(initial=0.0)), 1e-300)
    if not norms.size or not keep.any():
        return np.zeros(mats.shape[1:], dtype=complex)
    coeff = rng.standard_normal(int(keep.sum())) / norms[keep]
    return np.tensordot(coeff, herm[keep], axes=1)


def _commutator_columns(params: list[tuple[int, int]], b: np.ndarray) -> np.ndarray:
    """Columns vec(E_ab b - b E_ab) for the parameter matrix units (a, b)."""
    n = b.shape[0]
    out = np.zeros((len(params), n, n), dtype=complex)
    for k, (i, j) in enumerate(params):
        out[k, i, :] += b[j, :]
        out[k, :, j] -= b[:, i]
    return out.reshape(len(params), -1).T


def commutant_columns(mats: np.ndarray, tol: float, rng: np.random.Generator | None = None) -> np.ndarray:
    """Orthonormal vec-basis of {X : X m = m X for every m in ``mats``}.

    ``mats`` must span a *-closed set (the usual case: an algebra basis).

    The candidate space is first cut down to the block-diagonal matrices in
    the eigenframe of a random self-adjoint element, then two more random
    self-adjoint elements supply the constraints.  The result is verified
    against every matrix; on failure all matrices are used as constraints.
    """
    mats = as_stack(mats)
    n = mats.shape[1]
    rng = np.random.default_rng(0) if rng is None else rng
    h = random_hermitian(mats, rng)
    w, frame = np.linalg.eigh(h)
    spread = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    groups = cluster_eigenvalues(w, max(np.sqrt(tol), 1e-6) * spread)
    params = [(int(i), int(j)) for g in groups for i in g for j in g]
    rotated = dagger(frame)[None] @ mats @ frame[None]
    scale = max(1.0, float(np.max(np.linalg.norm(mats.reshape(mats.shape[0], -1), axis=1))))

    def solve(constraints: list[np.ndarray]) -> np.ndarray:
        floor = max(float(np.linalg.norm(c)) for c in constraints)
        coeffs = null_space_stacked((_commutator_columns(params, c) for c in constraints), len(params), tol, floor)
        y = np.zeros((coeffs.shape[1], n, n), dtype=complex)
        for k, (i, j) in enumerate(params):
            y[:, i, j] = coeffs[k]
        x = frame[None] @ y @ dagger(frame)[None]
        return vec(x)

    probes = [dagger(frame) @ random_hermitian(mats, rng) @ frame for _ in range(2)]
    cols = solve(probes)
    xs = unvec(cols, n)
    worst = 0.0
    for m in mats:
        comm = xs @ m - m @ xs
        worst = max(worst, float(np.max(np.linalg.norm(comm.reshape(comm.shape[0], -1), axis=1), initial=0.0)))
    if worst > tol * scale:
        cols = solve(list(rotated))
    return orthonormal_columns(cols, tol) if cols.shape[1] else cols
