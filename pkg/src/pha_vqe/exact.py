"""Exact diagonalization of small qubit Hamiltonians.

Dense matrices are built from Kronecker products of 2x2 Pauli matrices and
diagonalized with a cyclic Jacobi eigensolver written here, so that the
reference energies do not share code with the statevector path.
"""

from __future__ import annotations

import numpy as np

from .hamiltonian import QubitHamiltonian
from .simulator import Statevector

__all__ = ["MAX_QUBITS", "to_dense", "jacobi_eigh", "eigh_hermitian", "ground_state", "ground_energy"]

MAX_QUBITS = 14

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _kron_string(label: str) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for char in label:
        m = np.kron(m, _PAULI[char])
    return m


def _scatter_string(string, dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonzeros of one Pauli string: column ``b`` holds ``i**ny (-1)**|b & z|`` at row ``b ^ x``."""
    cols = np.arange(dim)
    bits = cols & string.z_mask
    parity = np.zeros(dim, dtype=np.int64)
    while np.any(bits):
        parity ^= bits & 1
        bits >>= 1
    return cols ^ string.x_mask, cols, (1j**string.n_y) * (1 - 2 * parity)


def to_dense(h: QubitHamiltonian, method: str = "auto") -> np.ndarray:
    """``sum_j c_j P_j`` as a ``2**n x 2**n`` matrix.

    ``method="kron"`` multiplies out the 2x2 Pauli matrices in label order
    (leftmost character = top qubit, giving little-endian indexing);
    ``"scatter"`` writes each string's single nonzero per column directly.
    ``"auto"`` uses ``kron`` up to 6 qubits.
    """
    n = h.n_qubits
    if n > MAX_QUBITS:
        raise MemoryError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
    if method == "auto":
        method = "kron" if n <= 6 else "scatter"
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        if method == "kron":
            out += complex(term.coefficient) * _kron_string(term.label)
        elif method == "scatter":
            rows, cols, vals = _scatter_string(term.string, dim)
            out[rows, cols] += complex(term.coefficient) * vals
        else:
            raise ValueError(f"unknown method {method!r}")
    return out


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Circle-method schedule: every index pair exactly once, disjoint within a step."""
    m = n + (n % 2)
    ring = list(range(m))
    steps = []
    for _ in range(m - 1):
        pairs = [(ring[i], ring[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        steps.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        ring = [ring[0], ring[-1], *ring[1:-1]]
    return steps


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Rotations follow a round-robin ordering so each step annihilates a set of
    disjoint off-diagonal pairs at once. Returns ascending eigenvalues and
    orthonormal eigenvectors as columns.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    if not np.allclose(a, a.T, atol=1e-10, rtol=0):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.diag(a).copy(), v
    scale = max(np.abs(a).max(), 1e-300)
    steps = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.sqrt(2 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale * n:
            break
        for p, q in steps:
            apq = a[p, q]
            active = np.abs(apq) > 1e-18 * scale
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1))
            c = 1 / np.sqrt(t * t + 1)
            s = t * c
            ap, aq = a[:, p], a[:, q]
            a[:, p], a[:, q] = c * ap - s * aq, s * ap + c * aq
            ap, aq = a[p, :], a[q, :]
            a[p, :], a[q, :] = c[:, None] * ap - s[:, None] * aq, s[:, None] * ap + c[:, None] * aq
            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigh_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigensolve via Jacobi.

    Real matrices are handled directly. Complex ones use the real embedding
    ``[[A, -B], [B, A]]``, whose spectrum is each eigenvalue twice; there
    the returned vectors are only guaranteed for non-degenerate eigenvalues.
    """
    m = np.asarray(m)
    if not np.allclose(m, m.conj().T, atol=1e-10, rtol=0):
        raise ValueError("operator is not Hermitian")
    if np.abs(m.imag).max(initial=0.0) <= 1e-14:
        return jacobi_eigh(m.real)
    a, b = m.real, m.imag
    w, v = jacobi_eigh(np.block([[a, -b], [b, a]]))
    dim = m.shape[0]
    vecs = v[:dim, :] + 1j * v[dim:, :]
    # each eigenvalue appears twice; keep every other column after sorting
    return w[::2], vecs[:, ::2] / np.linalg.norm(vecs[:, ::2], axis=0)


def _blocks(m: np.ndarray) -> list[np.ndarray]:
    """Index sets of the connected components of the nonzero pattern of ``m``."""
    adj = np.abs(m) > 1e-14
    unseen = np.ones(m.shape[0], dtype=bool)
    blocks = []
    while unseen.any():
        frontier = np.zeros_like(unseen)
        frontier[np.flatnonzero(unseen)[0]] = True
        member = frontier.copy()
        while frontier.any():
            frontier = adj[frontier].any(axis=0) & ~member
            member |= frontier
        unseen &= ~member
        blocks.append(np.flatnonzero(member))
    return blocks


def ground_state(op: np.ndarray | QubitHamiltonian) -> tuple[float, Statevector]:
    """Lowest eigenvalue and a unit eigenvector (residual checked to 1e-8).

    Symmetry sectors (connected blocks of the matrix) are diagonalized
    independently.
    """
    m = to_dense(op) if isinstance(op, QubitHamiltonian) else np.asarray(op, dtype=complex)
    n = int(round(np.log2(m.shape[0])))
    if m.ndim != 2 or m.shape != (2**n, 2**n):
        raise ValueError(f"operator shape {m.shape} is not 2**n square")
    if not np.allclose(m, m.conj().T, atol=1e-10, rtol=0):
        raise ValueError("operator is not Hermitian")
    best = None
    for idx in _blocks(m):
        w, v = eigh_hermitian(m[np.ix_(idx, idx)])
        if best is None or w[0] < best[0] - 1e-12:
            best = (float(w[0]), idx, v[:, 0])
    e, idx, sub = best
    vec = np.zeros(m.shape[0], dtype=complex)
    vec[idx] = sub
    vec /= np.linalg.norm(vec)
    residual = np.linalg.norm(m @ vec - e * vec)
    if residual > 1e-8:
        raise ArithmeticError(f"eigen-residual {residual:.3g} above tolerance")
    return e, Statevector(n, vec)


def ground_energy(h: QubitHamiltonian) -> float:
    return ground_state(h)[0]
