"""Received covariances, MMSE matrices and mutual-information rates.

Only second-order statistics are used: every transmitted stream has unit
power, so a precoder ``V`` contributes ``H V V^H H^H`` to a covariance.
Rates are in bits per channel use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg as sla

from .channel import ChannelSet
from .config import ScenarioConfig

__all__ = [
    "Precoder",
    "RateReport",
    "CovariancePair",
    "MsePair",
    "Combiners",
    "logdet2_hpd",
    "covariance_user",
    "covariance_sensing",
    "interference_user",
    "interference_sensing",
    "cmi_rate",
    "smi_rate",
    "mse_matrices",
    "weighted_sum_rate",
]

LN2 = np.log(2.0)


def hermitian(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + X.conj().T)


def logdet2_hpd(A: np.ndarray) -> float:
    """``log2 det(A)`` for Hermitian positive definite ``A`` via Cholesky."""
    L = np.linalg.cholesky(hermitian(A))
    return float(2.0 * np.sum(np.log(np.abs(np.diag(L)))) / LN2)


@dataclass
class Precoder:
    """Transmit beamformers: ``comm[k]`` is ``(N_t, R)``, ``sense`` is ``(N_t, S)``."""

    comm: list
    sense: np.ndarray

    @property
    def n_users(self) -> int:
        return len(self.comm)

    def total_power(self) -> float:
        p = sum(np.vdot(V, V).real for V in self.comm)
        return float(p + np.vdot(self.sense, self.sense).real)

    def stacked(self) -> np.ndarray:
        """All streams side by side, ``(N_t, K R + S)``."""
        return np.hstack(list(self.comm) + [self.sense])

    @classmethod
    def from_stacked(cls, V: np.ndarray, n_users: int, n_ue_ant: int) -> "Precoder":
        comm = [V[:, k * n_ue_ant:(k + 1) * n_ue_ant].copy() for k in range(n_users)]
        return cls(comm=comm, sense=V[:, n_users * n_ue_ant:].copy())

    def scaled(self, c: complex) -> "Precoder":
        return Precoder([c * V for V in self.comm], c * self.sense)

    def copy(self) -> "Precoder":
        return Precoder([V.copy() for V in self.comm], self.sense.copy())

    def transmit_covariance(self) -> np.ndarray:
        """``sum_k V_k V_k^H + V_tau V_tau^H``."""
        V = self.stacked()
        return V @ V.conj().T


@dataclass
class Combiners:
    """Receive combiners ``B_k`` (``R x R``) and ``B_tau`` (``N_r x S``)."""

    comm: list
    sense: np.ndarray


@dataclass
class CovariancePair:
    per_user: list
    sensing: np.ndarray


@dataclass
class MsePair:
    per_user: list
    sensing: np.ndarray


@dataclass
class RateReport:
    comm_rates: List[float]
    sense_rate: float
    weighted_sum: float

    @property
    def mean_comm_rate(self) -> float:
        return float(np.mean(self.comm_rates))

    @property
    def sc_rate(self) -> float:
        """Average rate per user plus the sensing rate."""
        return self.mean_comm_rate + self.sense_rate

    def to_dict(self) -> dict:
        return {
            "comm_rates": [float(r) for r in self.comm_rates],
            "sense_rate": float(self.sense_rate),
            "weighted_sum": float(self.weighted_sum),
        }


def _gram(X: np.ndarray) -> np.ndarray:
    return X @ X.conj().T


def covariance_user(channels: ChannelSet, v: Precoder, k: int, noise_var: float) -> np.ndarray:
    """Covariance of everything received by user ``k``, own signal included."""
    H = channels.comm[k]
    A = _gram(H @ v.stacked())
    return hermitian(A) + noise_var * np.eye(H.shape[0])


def interference_user(channels: ChannelSet, v: Precoder, k: int, noise_var: float) -> np.ndarray:
    """Interference-plus-noise covariance at user ``k`` (own streams excluded)."""
    H = channels.comm[k]
    others = [Vi for i, Vi in enumerate(v.comm) if i != k] + [v.sense]
    J = _gram(H @ np.hstack(others))
    return hermitian(J) + noise_var * np.eye(H.shape[0])


def covariance_sensing(channels: ChannelSet, v: Precoder, noise_var: float) -> np.ndarray:
    """Covariance at the sensing receiver: target, user leakage, clutter, noise."""
    V = v.stacked()
    A = _gram(channels.sense @ V)
    for G in channels.clutter:
        A = A + _gram(G @ V)
    return hermitian(A) + noise_var * np.eye(channels.n_rx)


def interference_sensing(channels: ChannelSet, v: Precoder, noise_var: float) -> np.ndarray:
    """Sensing covariance without the target's own ``G_tau V_tau`` term."""
    V = v.stacked()
    if v.n_users:
        J = _gram(channels.sense @ np.hstack(v.comm))
    else:
        J = np.zeros((channels.n_rx, channels.n_rx), dtype=complex)
    for G in channels.clutter:
        J = J + _gram(G @ V)
    return hermitian(J) + noise_var * np.eye(channels.n_rx)


def _whitened_logdet(J: np.ndarray, X: np.ndarray) -> float:
    # log2 det(I + X^H J^-1 X) with J = L L^H; equals log2 det(I + X X^H J^-1)
    L = np.linalg.cholesky(J)
    Y = sla.solve_triangular(L, X, lower=True)
    return max(logdet2_hpd(np.eye(Y.shape[1]) + Y.conj().T @ Y), 0.0)


def cmi_rate(channels: ChannelSet, v: Precoder, k: int, noise_var: float) -> float:
    """Communication mutual-information rate of user ``k`` in bits."""
    J = interference_user(channels, v, k, noise_var)
    return _whitened_logdet(J, channels.comm[k] @ v.comm[k])


def smi_rate(channels: ChannelSet, v: Precoder, noise_var: float) -> float:
    """Sensing mutual-information rate, ``log2 det(I + SCNR)``."""
    J = interference_sensing(channels, v, noise_var)
    return _whitened_logdet(J, channels.sense @ v.sense)


def mse_matrices(channels: ChannelSet, v: Precoder, combiners: Combiners,
                 cfg: ScenarioConfig) -> MsePair:
    """MSE matrices of every receiver for the given combiners.

    Uses the general form ``I - B^H H V - V^H H^H B + B^H A B``, which equals
    ``I - V^H H^H A^-1 H V`` when ``B = A^-1 H V``.
    """
    per_user = []
    for k, H in enumerate(channels.comm):
        A = covariance_user(channels, v, k, cfg.noise_power_comm)
        per_user.append(_mse(combiners.comm[k], H @ v.comm[k], A))
    A_t = covariance_sensing(channels, v, cfg.noise_power_sense)
    sensing = _mse(combiners.sense, channels.sense @ v.sense, A_t)
    return MsePair(per_user, sensing)


def _mse(B, HV, A) -> np.ndarray:
    cross = B.conj().T @ HV
    E = np.eye(B.shape[1]) - cross - cross.conj().T + B.conj().T @ A @ B
    return hermitian(E)


def weighted_sum_rate(channels: ChannelSet, v: Precoder, cfg: ScenarioConfig) -> RateReport:
    """Per-user rates, sensing rate and ``sum_k alpha_k R_k + alpha_tau R_tau``."""
    comm_rates = [cmi_rate(channels, v, k, cfg.noise_power_comm)
                  for k in range(channels.n_users)]
    sense_rate = smi_rate(channels, v, cfg.noise_power_sense)
    weighted = sum(a * r for a, r in zip(cfg.comm_weights, comm_rates))
    weighted += cfg.weight_sense * sense_rate
    return RateReport(comm_rates=comm_rates, sense_rate=sense_rate, weighted_sum=float(weighted))
