"""Input validation for channel sets and precoders."""

from __future__ import annotations

import numpy as np

from .channel import ChannelSet
from .config import ScenarioConfig
from .metrics import Precoder

__all__ = ["check_matrix", "check_channel_set", "check_precoder"]


def check_matrix(X, shape, name: str) -> np.ndarray:
    """Return ``X`` as a finite complex 2-D array of the given shape."""
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got array with ndim={arr.ndim}")
    if tuple(arr.shape) != tuple(shape):
        raise ValueError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr.astype(complex, copy=False)


def check_channel_set(channels, cfg: ScenarioConfig) -> ChannelSet:
    """Validate channel dimensions against ``cfg``.

    Raises ``TypeError`` for a non-ChannelSet and ``ValueError`` for any
    count or shape mismatch.
    """
    if not isinstance(channels, ChannelSet):
        raise TypeError(f"expected a ChannelSet, got {type(channels).__name__}")
    if len(channels.comm) != cfg.n_users:
        raise ValueError(f"{len(channels.comm)} user channels, config has n_users={cfg.n_users}")
    if len(channels.clutter) != cfg.n_clutters:
        raise ValueError(
            f"{len(channels.clutter)} clutter channels, config has n_clutters={cfg.n_clutters}")
    comm = [check_matrix(H, (cfg.n_ue_ant, cfg.n_tx), f"comm[{k}]")
            for k, H in enumerate(channels.comm)]
    sense = check_matrix(channels.sense, (cfg.n_rx, cfg.n_tx), "sense")
    clutter = [check_matrix(G, (cfg.n_rx, cfg.n_tx), f"clutter[{l}]")
               for l, G in enumerate(channels.clutter)]
    return ChannelSet(comm=comm, sense=sense, clutter=clutter, angles=channels.angles)


def check_precoder(v, cfg: ScenarioConfig, feasibility_rtol: float = None) -> Precoder:
    """Validate precoder shapes; optionally enforce the power budget."""
    if not isinstance(v, Precoder):
        raise TypeError(f"expected a Precoder, got {type(v).__name__}")
    if len(v.comm) != cfg.n_users:
        raise ValueError(f"precoder has {len(v.comm)} user blocks, expected {cfg.n_users}")
    comm = [check_matrix(V, (cfg.n_tx, cfg.n_ue_ant), f"precoder.comm[{k}]")
            for k, V in enumerate(v.comm)]
    sense = check_matrix(v.sense, (cfg.n_tx, cfg.n_sense_streams), "precoder.sense")
    out = Precoder(comm, sense)
    if feasibility_rtol is not None:
        p = out.total_power()
        if p > cfg.power_budget * (1.0 + feasibility_rtol):
            raise ValueError(f"precoder power {p!r} exceeds budget {cfg.power_budget!r}")
    if out.total_power() == 0.0:
        raise ValueError("all-zero precoder is a fixed point of the solver")
    return out
