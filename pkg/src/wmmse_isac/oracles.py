"""Independent reference computations used to cross-check the solver.

Nothing here calls into :mod:`wmmse_isac.solver` or reuses the factorized
code paths of :mod:`wmmse_isac.metrics`.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "waterfill_capacity",
    "brute_force_covariance_user",
    "brute_force_covariance_sensing",
    "eig_logdet2",
    "power_curve",
]


def waterfill_capacity(H: np.ndarray, noise_var: float, power: float) -> float:
    """Single-user MIMO capacity in bits via SVD and water-filling.

    Mode gains ``g_i = s_i^2 / noise_var`` receive ``p_i = max(mu - 1/g_i, 0)``
    with ``sum p_i = power``.
    """
    s = np.linalg.svd(H, compute_uv=False)
    g = np.sort(s[s > 0] ** 2 / noise_var)[::-1]
    inv = 1.0 / g
    for n in range(g.size, 0, -1):
        mu = (power + inv[:n].sum()) / n
        if mu > inv[n - 1]:
            p = mu - inv[:n]
            return float(np.sum(np.log2(1.0 + p * g[:n])))
    return 0.0


def _outer_sum(X, V):
    n = X.shape[0]
    acc = np.zeros((n, n), dtype=complex)
    for col in range(V.shape[1]):
        y = X @ V[:, col]
        acc += np.outer(y, y.conj())
    return acc


def brute_force_covariance_user(comm, v_comm, v_sense, k, noise_var):
    """Received covariance at user ``k``, one stream outer product at a time."""
    H = comm[k]
    A = noise_var * np.eye(H.shape[0], dtype=complex)
    for Vi in v_comm:
        A += _outer_sum(H, Vi)
    A += _outer_sum(H, v_sense)
    return A


def brute_force_covariance_sensing(sense, clutter, v_comm, v_sense, noise_var):
    A = noise_var * np.eye(sense.shape[0], dtype=complex)
    A += _outer_sum(sense, v_sense)
    for Vj in v_comm:
        A += _outer_sum(sense, Vj)
    for G in clutter:
        for Vn in v_comm:
            A += _outer_sum(G, Vn)
        A += _outer_sum(G, v_sense)
    return A


def eig_logdet2(A: np.ndarray) -> float:
    """``log2 det`` of a Hermitian matrix from its eigenvalues."""
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    return float(np.sum(np.log2(w)))


def power_curve(M: np.ndarray, rhs: np.ndarray, lams) -> np.ndarray:
    """``||(M + lam I)^-1 rhs||_F^2`` by direct linear solves on a grid."""
    eye = np.eye(M.shape[0])
    return np.array([np.linalg.norm(np.linalg.solve(M + lam * eye, rhs)) ** 2 for lam in lams])
