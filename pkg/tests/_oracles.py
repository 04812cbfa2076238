"""Independent reference computations used only by the tests.

Each oracle follows the textbook definition as literally as possible and
shares no code with the package beyond plain numpy.
"""

from __future__ import annotations

import itertools

import numpy as np


def graded_frame(u):
    """Eigenvectors of a grading unitary and their grades (+1 / -1)."""
    w, v = np.linalg.eigh(0.5 * (u + u.conj().T))
    return v, np.where(w < 0, -1, 1)


def sign_rule_product(s, t, u_h, u_k):
    """``S ⊛ T`` from ``(S ⊛ T)(xi (x) eta) = eps(T, xi) S xi (x) T eta`` on homogeneous vectors.

    ``T`` is split into its even and odd parts, ``xi`` and ``eta`` run over
    eigenvectors of the grading unitaries, and the matrix is assembled from
    its action on the product eigenbasis.
    """
    t_even = 0.5 * (t + u_k @ t @ u_k)
    t_odd = 0.5 * (t - u_k @ t @ u_k)
    vh, gh = graded_frame(u_h)
    vk, _ = graded_frame(u_k)
    dh, dk = s.shape[0], t.shape[0]
    images = np.zeros((dh * dk, dh * dk), dtype=complex)
    inputs = np.zeros_like(images)
    col = 0
    for i in range(dh):
        xi = vh[:, i]
        for j in range(dk):
            eta = vk[:, j]
            out = np.zeros(dh * dk, dtype=complex)
            for part, grade in ((t_even, 1), (t_odd, -1)):
                eps = -1 if (grade == -1 and gh[i] == -1) else 1
                out += eps * np.kron(s @ xi, part @ eta)
            images[:, col] = out
            inputs[:, col] = np.kron(xi, eta)
            col += 1
    return images @ np.linalg.inv(inputs)


def brute_commutant_dim(mats, tol=1e-9):
    """Dimension of ``{X : X m = m X}`` from the full Kronecker system."""
    mats = np.asarray(mats, dtype=complex)
    d = mats.shape[1]
    eye = np.eye(d)
    system = np.vstack([np.kron(eye, m.T) - np.kron(m, eye) for m in mats])
    s = np.linalg.svd(system, compute_uv=False)
    full = np.zeros(d * d)
    full[: s.size] = s
    return int(np.sum(full <= tol * max(full.max(), 1.0)))


def span_rank(mats, tol=1e-9):
    mats = np.asarray(mats, dtype=complex)
    flat = mats.reshape(mats.shape[0], -1)
    s = np.linalg.svd(flat, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0


def same_span(a, b, tol=1e-9):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ra, rb = span_rank(a, tol), span_rank(b, tol)
    return ra == rb == span_rank(np.concatenate([a, b]), tol)


def legwise_average(x, unitaries):
    """``2^-n sum_s Ad(U_0^{s_0} (x) ... (x) U_{n-1}^{s_{n-1}})(x)``."""
    n = len(unitaries)
    total = np.zeros_like(x, dtype=complex)
    for bits in itertools.product((0, 1), repeat=n):
        g = np.ones((1, 1), dtype=complex)
        for bit, u in zip(bits, unitaries):
            g = np.kron(g, u if bit else np.eye(u.shape[0]))
        total += g @ x @ g.conj().T
    return total / 2 ** n


def random_grading_unitary(d, rng, n_odd=None):
    """``Q diag(+-1) Q*`` with a random unitary frame ``Q``."""
    if n_odd is None:
        n_odd = int(rng.integers(0, d + 1))
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, _ = np.linalg.qr(z)
    signs = np.array([1.0] * (d - n_odd) + [-1.0] * n_odd)
    return (q * signs) @ q.conj().T


def random_homogeneous(u, rng, grade):
    z = rng.standard_normal(u.shape) + 1j * rng.standard_normal(u.shape)
    return 0.5 * (z + grade * (u @ z @ u))


def random_element(alg, rng):
    c = rng.standard_normal(alg.dim) + 1j * rng.standard_normal(alg.dim)
    return np.tensordot(c, alg.basis, axes=1)
