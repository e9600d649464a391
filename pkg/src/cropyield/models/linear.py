"""Ordinary least squares via Householder QR with column pivoting."""
import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


def householder_qr(A, pivoting=True):
    """Factor ``A[:, perm] = Q R``.

    Returns ``(V, tau, R, perm)``: Householder vectors stored column-wise in ``V``
    (reflector ``H_j = I - tau_j v_j v_j^T``), upper-triangular ``R`` of shape
    ``(min(m, n), n)`` and the column permutation. With ``pivoting`` the column
    of largest remaining norm is moved forward at each step.
    """
    R = np.array(A, dtype=np.float64, copy=True)
    m, n = R.shape
    k = min(m, n)
    perm = np.arange(n)
    V = np.zeros((m, k))
    tau = np.zeros(k)
    for j in range(k):
        if pivoting:
            norms = np.einsum("ij,ij->j", R[j:, j:], R[j:, j:])
            q = j + int(np.argmax(norms))
            if q != j:
                R[:, [j, q]] = R[:, [q, j]]
                perm[[j, q]] = perm[[q, j]]
        x = R[j:, j]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        vnorm2 = np.dot(v, v)
        V[j:, j] = v
        tau[j] = 2.0 / vnorm2
        R[j:, j:] -= np.outer(tau[j] * v, v @ R[j:, j:])
        R[j + 1:, j] = 0.0
    return V, tau, np.triu(R[:k]), perm


def apply_qt(V, tau, b):
    """``Q^T b`` from the stored reflectors."""
    b = np.array(b, dtype=np.float64, copy=True)
    for j in range(tau.size):
        if tau[j] != 0.0:
            v = V[j:, j]
            b[j:] -= tau[j] * v * np.dot(v, b[j:])
    return b


def back_substitute(R, c):
    n = R.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (c[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x


def numerical_rank(R, rtol=None):
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return 0
    if rtol is None:
        rtol = max(R.shape) * np.finfo(np.float64).eps
    return int(np.count_nonzero(d > rtol * d[0]))


def lstsq(A, b):
    """Minimum-norm least-squares solution of ``A x ~ b``.

    Full column rank: back substitution on the pivoted QR. Rank deficient:
    complete orthogonal decomposition, i.e. a second QR of ``R[:r]^T`` so the
    solution lies in the row space of ``A``. Returns ``(x, rank)``.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, n = A.shape
    V, tau, R, perm = householder_qr(A)
    c = apply_qt(V, tau, b)
    r = numerical_rank(R)
    x = np.zeros(n)
    if r == 0:
        return x, 0
    if r == n:
        x[perm] = back_substitute(R[:n], c[:n])
        return x, r
    # R[:r] P^T x = c[:r];  R[:r]^T = Z L  =>  R[:r] = L^T Z^T, x_perm = Z L^-T c
    Vz, tauz, L, _ = householder_qr(R[:r].T, pivoting=False)
    u = _forward_substitute(L.T, c[:r])
    z = np.zeros(n)
    z[:r] = u
    # apply Z = H_0 H_1 ... to [u; 0]
    for j in range(tauz.size - 1, -1, -1):
        if tauz[j] != 0.0:
            v = Vz[j:, j]
            z[j:] -= tauz[j] * v * np.dot(v, z[j:])
    x[perm] = z
    return x, r


def _forward_substitute(Lo, c):
    n = Lo.shape[0]
    x = np.zeros(n)
    for i in range(n):
        x[i] = (c[i] - Lo[i, :i] @ x[:i]) / Lo[i, i]
    return x


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray  # intercept first
    rank: int = -1

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        return self.weights[0] + X @ self.weights[1:]


def fit_linear(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] < 1:
        raise ValueError("fit_linear needs at least one row")
    design = np.column_stack([np.ones(X.shape[0]), X])
    w, rank = lstsq(design, y)
    if rank < design.shape[1]:
        logger.info("design matrix rank %d < %d columns; using minimum-norm solution",
                    rank, design.shape[1])
    return LinearModel(w, rank)
