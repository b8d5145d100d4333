"""Alternating WMMSE solver for the joint sensing/communication precoder.

Each outer iteration updates, in order, the MMSE combiners, the MSE weight
matrices ``W = E^-1`` and then all precoders in closed form. The precoder
update shares one kernel matrix between every user stream and the sensing
stream; the power multiplier is found by bisection in the eigenbasis of
that kernel, where transmit power is an explicit decreasing function of
the multiplier.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg as sla

from .channel import ChannelSet, trial_rng
from .config import ScenarioConfig
from .exceptions import ConditioningError, SolverError
from .metrics import (
    Combiners,
    CovariancePair,
    MsePair,
    Precoder,
    covariance_sensing,
    covariance_user,
    hermitian,
    logdet2_hpd,
    mse_matrices,
    weighted_sum_rate,
)

__all__ = [
    "SolverState",
    "BisectionResult",
    "initial_precoder",
    "update_combiners",
    "update_weights",
    "precoder_rhs_and_kernel",
    "solve_power_multiplier",
    "update_precoders",
    "objective",
    "lagrangian",
    "gradient",
    "gradient_check",
    "solve",
    "SENSE",
]

logger = logging.getLogger(__name__)

SENSE = "sense"
MIN_MSE_EIG = 1e-14
BISECTION_MAX_ITERS = 200
BISECTION_MIN_WIDTH = 1e-12


@dataclass
class SolverState:
    """Iterate of the alternating solver.

    ``combiners``, ``weights_*`` and ``mse`` are those computed from the
    precoder *before* the last precoder update; ``precoder`` is the latest.
    ``rate_trace[0]`` is the weighted sum rate at the initial precoder and
    ``rate_trace[i]`` the rate after the ``i``-th precoder update.
    """

    precoder: Precoder
    combiners: Optional[Combiners] = None
    weights_comm: list = field(default_factory=list)
    weight_sense: Optional[np.ndarray] = None
    mse: Optional[MsePair] = None
    lam: float = 0.0
    objective_trace: list = field(default_factory=list)
    rate_trace: list = field(default_factory=list)
    power_trace: list = field(default_factory=list)
    lambda_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    def trace_rows(self) -> list:
        """Per-iteration diagnostics as flat records."""
        rows = []
        for i, rate in enumerate(self.rate_trace):
            rows.append({
                "iteration": i,
                "objective": self.objective_trace[i - 1] if i else float("nan"),
                "weighted_rate": rate,
                "lambda": self.lambda_trace[i - 1] if i else float("nan"),
                "power": self.power_trace[i],
            })
        return rows

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_lambda": float(self.lam),
            "final_rate": float(self.rate_trace[-1]) if self.rate_trace else float("nan"),
            "final_power": float(self.power_trace[-1]) if self.power_trace else float("nan"),
        }


@dataclass
class BisectionResult:
    lam: float
    power: float
    iterations: int
    active: bool


def _dominant_right_vectors(X: np.ndarray, n: int) -> np.ndarray:
    # columns are the n dominant right singular vectors, zero padded if n > n_tx
    _, _, Vh = np.linalg.svd(X, full_matrices=True)
    basis = Vh.conj().T
    out = np.zeros((X.shape[1], n), dtype=complex)
    m = min(n, basis.shape[1])
    out[:, :m] = basis[:, :m]
    return out


def initial_precoder(channels: ChannelSet, cfg: ScenarioConfig,
                     rng: Optional[np.random.Generator] = None) -> Precoder:
    """Feasible nonzero starting point using the full power budget.

    ``"matched"`` steers user ``k`` along the dominant right singular vectors
    of ``H_k`` and the sensing streams along those of ``G_tau`` (its first
    one is the target's transmit steering vector). ``"random"`` draws i.i.d.
    complex Gaussian entries from ``rng``.
    """
    R, S = cfg.n_ue_ant, cfg.n_sense_streams
    if cfg.init == "matched":
        comm = [_dominant_right_vectors(H, R) for H in channels.comm]
        sense = _dominant_right_vectors(channels.sense, S)
    else:
        if rng is None:
            rng = trial_rng(cfg.seed, 0, stream=1)
        shape_c, shape_s = (channels.n_tx, R), (channels.n_tx, S)
        comm = [rng.standard_normal(shape_c) + 1j * rng.standard_normal(shape_c)
                for _ in channels.comm]
        sense = rng.standard_normal(shape_s) + 1j * rng.standard_normal(shape_s)
    v = Precoder(comm, sense)
    return v.scaled(np.sqrt(cfg.power_budget / v.total_power()))


def update_combiners(channels: ChannelSet, v: Precoder, cfg: ScenarioConfig):
    """MMSE receive combiners ``B = A^-1 H V`` and the covariances ``A``."""
    comm_B, comm_A = [], []
    for k, H in enumerate(channels.comm):
        A = covariance_user(channels, v, k, cfg.noise_power_comm)
        comm_B.append(sla.cho_solve(sla.cho_factor(A), H @ v.comm[k]))
        comm_A.append(A)
    A_t = covariance_sensing(channels, v, cfg.noise_power_sense)
    B_t = sla.cho_solve(sla.cho_factor(A_t), channels.sense @ v.sense)
    return Combiners(comm_B, B_t), CovariancePair(comm_A, A_t)


def _inverse_hpd(E: np.ndarray, label: str) -> np.ndarray:
    w, U = np.linalg.eigh(hermitian(E))
    if w.min() < MIN_MSE_EIG:
        raise ConditioningError(
            f"MSE matrix of {label} is numerically singular: smallest eigenvalue "
            f"{w.min():.3e} < {MIN_MSE_EIG:.0e} (eigenvalues {np.array2string(w, precision=3)})")
    return hermitian((U / w) @ U.conj().T)


def update_weights(mse: MsePair):
    """``W_k = E_k^-1`` and ``W_tau = E_tau^-1``, exactly Hermitian."""
    W_comm = [_inverse_hpd(E, f"user {k}") for k, E in enumerate(mse.per_user)]
    W_sense = _inverse_hpd(mse.sensing, "sensing target")
    return W_comm, W_sense


def _quad(X, B, W):
    # X^H B W B^H X
    T = X.conj().T @ B
    return T @ W @ T.conj().T


def precoder_rhs_and_kernel(channels: ChannelSet, state: SolverState, cfg: ScenarioConfig):
    """Kernel shared by every precoder update and the per-stream right-hand sides.

    Returns
    -------
    M : ndarray, (N_t, N_t)
        ``sum_i a_i H_i^H B_i W_i B_i^H H_i + a_tau (G_tau^H B W B^H G_tau
        + sum_l G_l^H B W B^H G_l)`` with ``B, W`` the sensing pair.
    rhs : Precoder
        ``a_k H_k^H B_k W_k`` per user and ``a_tau G_tau^H B_tau W_tau``.
    """
    B, alphas, a_t = state.combiners, cfg.comm_weights, cfg.weight_sense
    M = np.zeros((channels.n_tx, channels.n_tx), dtype=complex)
    rhs_comm = []
    for k, H in enumerate(channels.comm):
        M += alphas[k] * _quad(H, B.comm[k], state.weights_comm[k])
        rhs_comm.append(alphas[k] * H.conj().T @ B.comm[k] @ state.weights_comm[k])
    W_t = state.weight_sense
    M += a_t * _quad(channels.sense, B.sense, W_t)
    for G in channels.clutter:
        M += a_t * _quad(G, B.sense, W_t)
    rhs_sense = a_t * channels.sense.conj().T @ B.sense @ W_t
    return hermitian(M), Precoder(rhs_comm, rhs_sense)


def solve_power_multiplier(M: np.ndarray, rhs: np.ndarray, power_budget: float,
                           rtol: float = 1e-8):
    """Minimize ``Tr(V^H M V) - 2 Re Tr(V^H rhs)`` subject to ``||V||_F^2 <= P0``.

    The solution is ``V = (M + lam I)^-1 rhs``. With ``M = U diag(d) U^H``
    and ``Q = U^H rhs`` the power is ``sum_i ||Q_i||^2 / (d_i + lam)^2``,
    strictly decreasing in ``lam``. ``lam = 0`` is kept when the
    unconstrained (minimum norm) solution already fits the budget; otherwise
    ``lam`` is bracketed by doubling and refined by bisection. The upper
    (feasible) end of the final bracket is returned.

    Returns
    -------
    V : ndarray, same shape as ``rhs``
    info : BisectionResult
    """
    d, U = np.linalg.eigh(M)
    d = np.clip(d, 0.0, None)
    Q = U.conj().T @ rhs
    q2 = np.sum(np.abs(Q) ** 2, axis=1)

    def power(lam):
        return float(q2 @ (d + lam) ** -2)

    def precoder(lam):
        return U @ (Q / (d + lam)[:, None])

    if not np.any(q2 > 0):
        return np.zeros_like(rhs), BisectionResult(0.0, 0.0, 0, False)

    # null-space components of rhs are rounding noise since rhs lies in range(M)
    floor = max(d.max(), 1.0) * 1e-13
    keep = d > floor
    if np.all(q2[~keep] <= 1e-20 * q2.sum()):
        p0 = float(np.sum(q2[keep] / d[keep] ** 2))
        if p0 <= power_budget:
            Qk = np.where(keep[:, None], Q / np.where(keep, d, 1.0)[:, None], 0.0)
            return U @ Qk, BisectionResult(0.0, p0, 0, False)

    lo, hi = 0.0, 1.0
    it = 0
    while power(hi) > power_budget:
        lo, hi = hi, 2.0 * hi
        it += 1
        if it > BISECTION_MAX_ITERS:
            raise SolverError("could not bracket the power multiplier")
    while it < BISECTION_MAX_ITERS:
        p_hi = power(hi)
        if (power_budget - p_hi) <= rtol * power_budget or hi - lo < BISECTION_MIN_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        if power(mid) > power_budget:
            lo = mid
        else:
            hi = mid
        it += 1
    return precoder(hi), BisectionResult(hi, power(hi), it, True)


def update_precoders(channels: ChannelSet, state: SolverState, cfg: ScenarioConfig):
    """Closed-form precoder update for fixed combiners and weights.

    Returns the new :class:`Precoder` and the power multiplier used.
    """
    M, rhs = precoder_rhs_and_kernel(channels, state, cfg)
    V, info = solve_power_multiplier(M, rhs.stacked(), cfg.power_budget, cfg.bisection_rtol)
    return Precoder.from_stacked(V, channels.n_users, cfg.n_ue_ant), info.lam


def objective(channels: ChannelSet, state: SolverState, cfg: ScenarioConfig) -> float:
    """Weighted MSE cost ``sum_k a_k (Tr(W_k E_k) - log2 det W_k) + a_tau (...)``."""
    mse = state.mse
    f = 0.0
    for a, W, E in zip(cfg.comm_weights, state.weights_comm, mse.per_user):
        f += a * (np.trace(W @ E).real - logdet2_hpd(W))
    f += cfg.weight_sense * (np.trace(state.weight_sense @ mse.sensing).real
                             - logdet2_hpd(state.weight_sense))
    return float(f)


def lagrangian(channels: ChannelSet, v: Precoder, state: SolverState,
               cfg: ScenarioConfig, lam: Optional[float] = None) -> float:
    """Weighted MSE cost at precoder ``v`` with combiners and weights held
    fixed, plus the power penalty ``lam * (power - P0)``."""
    lam = state.lam if lam is None else lam
    mse = mse_matrices(channels, v, state.combiners, cfg)
    probe = SolverState(precoder=v, combiners=state.combiners,
                        weights_comm=state.weights_comm, weight_sense=state.weight_sense,
                        mse=mse)
    return objective(channels, probe, cfg) + lam * (v.total_power() - cfg.power_budget)


def _stream_matrix(v: Precoder, k):
    return v.sense if k == SENSE else v.comm[k]


def gradient(channels: ChannelSet, state: SolverState, cfg: ScenarioConfig,
             k: Union[int, str], lam: Optional[float] = None) -> np.ndarray:
    """Gradient ``d f/d Re V + 1j d f/d Im V`` of the Lagrangian w.r.t. one block.

    Assembled term by term: the block's own MSE term, the leakage terms of
    the other receivers, and ``2 lam V``.
    """
    lam = state.lam if lam is None else lam
    B, alphas, a_t = state.combiners, cfg.comm_weights, cfg.weight_sense
    Vk = _stream_matrix(state.precoder, k)
    W_t = state.weight_sense
    g = 2.0 * lam * Vk
    for i, H in enumerate(channels.comm):
        g = g + 2.0 * alphas[i] * _quad(H, B.comm[i], state.weights_comm[i]) @ Vk
        if i == k:
            g = g - 2.0 * alphas[i] * H.conj().T @ B.comm[i] @ state.weights_comm[i]
    g = g + 2.0 * a_t * _quad(channels.sense, B.sense, W_t) @ Vk
    for G in channels.clutter:
        g = g + 2.0 * a_t * _quad(G, B.sense, W_t) @ Vk
    if k == SENSE:
        g = g - 2.0 * a_t * channels.sense.conj().T @ B.sense @ W_t
    return g


def _with_block(v: Precoder, k, X) -> Precoder:
    out = v.copy()
    if k == SENSE:
        out.sense = X
    else:
        out.comm[k] = X
    return out


def gradient_check(channels: ChannelSet, state: SolverState, cfg: ScenarioConfig,
                   k: Union[int, str], step: float = 1e-5) -> float:
    """Max relative error between :func:`gradient` and central differences.

    Every real and imaginary entry of the block is perturbed by ``+-step``.
    Returns ``max|g - g_fd| / max(max|g|, max|g_fd|)`` (0 when both vanish).
    """
    g = gradient(channels, state, cfg, k)
    X0 = _stream_matrix(state.precoder, k)
    g_fd = np.zeros_like(X0)
    for idx in np.ndindex(X0.shape):
        for unit in (1.0, 1j):
            E = np.zeros_like(X0)
            E[idx] = unit * step
            fp = lagrangian(channels, _with_block(state.precoder, k, X0 + E), state, cfg)
            fm = lagrangian(channels, _with_block(state.precoder, k, X0 - E), state, cfg)
            g_fd[idx] += unit * (fp - fm) / (2.0 * step)
    scale = max(np.abs(g).max(), np.abs(g_fd).max())
    if scale == 0.0:
        return 0.0
    return float(np.abs(g - g_fd).max() / scale)


def _converged(cfg: ScenarioConfig, state: SolverState) -> bool:
    if cfg.convergence_metric == "objective_abs":
        tr = state.objective_trace
        return len(tr) >= 2 and abs(tr[-1] - tr[-2]) < cfg.tol
    prev, cur = state.rate_trace[-2], state.rate_trace[-1]
    delta = abs(cur - prev)
    if cfg.convergence_metric == "rate_rel":
        delta = delta / max(abs(cur), np.finfo(float).tiny)
    return delta < cfg.tol


def solve(channels: ChannelSet, cfg: ScenarioConfig, init: Optional[Precoder] = None,
          rng: Optional[np.random.Generator] = None) -> SolverState:
    """Run the alternating solver until the rate stalls or ``max_iters`` updates.

    Parameters
    ----------
    channels : ChannelSet
    cfg : ScenarioConfig
        Supplies weights, noise powers, power budget and stopping rule.
    init : Precoder, optional
        Starting precoder. Must be nonzero: the all-zero precoder is a
        fixed point. Defaults to :func:`initial_precoder`.
    rng : Generator, optional
        Used only by ``cfg.init == "random"``.
    """
    v = initial_precoder(channels, cfg, rng) if init is None else init.copy()
    state = SolverState(precoder=v)
    state.rate_trace.append(weighted_sum_rate(channels, v, cfg).weighted_sum)
    state.power_trace.append(v.total_power())

    for it in range(1, cfg.max_iters + 1):
        state.combiners, _ = update_combiners(channels, state.precoder, cfg)
        state.mse = mse_matrices(channels, state.precoder, state.combiners, cfg)
        state.weights_comm, state.weight_sense = update_weights(state.mse)
        state.objective_trace.append(objective(channels, state, cfg))

        state.precoder, state.lam = update_precoders(channels, state, cfg)
        state.iterations = it
        state.lambda_trace.append(state.lam)
        state.power_trace.append(state.precoder.total_power())
        state.rate_trace.append(weighted_sum_rate(channels, state.precoder, cfg).weighted_sum)
        if _converged(cfg, state):
            state.converged = True
            break

    logger.debug("solve finished: %d iterations, converged=%s, rate=%.6f",
                 state.iterations, state.converged, state.rate_trace[-1])
    return state
