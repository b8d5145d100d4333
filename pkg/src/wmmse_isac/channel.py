"""Array responses and channel synthesis for one Monte-Carlo trial.

Communication channels follow a narrowband Saleh-Valenzuela style sum of
``P`` rank-one paths. The target and clutter channels are single rank-one
reflections between the transmit array and the sensing receiver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig

__all__ = [
    "ChannelSet",
    "steering_vector",
    "gen_comm_channel",
    "gen_sensing_channels",
    "sample_scenario",
    "trial_rng",
]

HALF_PI = np.pi / 2


def steering_vector(angle: float, n: int) -> np.ndarray:
    """Unit-norm response of a half-wavelength uniform linear array.

    Parameters
    ----------
    angle : float
        Direction in radians, within ``[-pi/2, pi/2]``.
    n : int
        Number of elements.

    Returns
    -------
    ndarray of complex, shape (n,)
        ``exp(1j * pi * m * sin(angle)) / sqrt(n)`` for ``m = 0..n-1``.
    """
    if n < 1:
        raise ValueError(f"array needs at least one element, got n={n}")
    angle = float(angle)
    if not -HALF_PI <= angle <= HALF_PI:
        raise ValueError(f"angle {angle!r} outside [-pi/2, pi/2]")
    m = np.arange(n)
    return np.exp(1j * np.pi * m * np.sin(angle)) / np.sqrt(n)


def _complex_gaussian(rng: np.random.Generator, var):
    # circularly symmetric, one draw per entry of ``var``
    var = np.asarray(var, dtype=float)
    re = rng.standard_normal(var.shape)
    im = rng.standard_normal(var.shape)
    return np.sqrt(var / 2.0) * (re + 1j * im)


def _draw_comm_paths(cfg: ScenarioConfig, rng: np.random.Generator) -> dict:
    aoa = rng.uniform(-HALF_PI, HALF_PI, cfg.n_paths)
    aod = rng.uniform(-HALF_PI, HALF_PI, cfg.n_paths)
    var = np.full(cfg.n_paths, cfg.path_var_nlos)
    var[0] = cfg.path_var_los
    gains = _complex_gaussian(rng, var)
    return {"aoa": aoa, "aod": aod, "gains": gains}


def _rank_one(gain, aoa, aod, n_rx, n_tx) -> np.ndarray:
    return gain * np.outer(steering_vector(aoa, n_rx), steering_vector(aod, n_tx).conj())


def comm_channel_from_paths(cfg: ScenarioConfig, aoa, aod, gains) -> np.ndarray:
    """Assemble ``gamma * sum_p beta_p a_R(aoa_p) a_t(aod_p)^H``."""
    H = np.zeros((cfg.n_ue_ant, cfg.n_tx), dtype=complex)
    for theta_r, theta_t, beta in zip(aoa, aod, gains):
        H += _rank_one(beta, theta_r, theta_t, cfg.n_ue_ant, cfg.n_tx)
    return cfg.path_gain_factor * H


def gen_comm_channel(cfg: ScenarioConfig, user_idx: int, rng: np.random.Generator) -> np.ndarray:
    """Draw the ``R x N_t`` downlink channel of one user.

    The first path uses the LOS variance and the remaining ``P - 1`` paths
    the NLOS variance. All angles are uniform on ``[-pi/2, pi/2]``.
    """
    if not 0 <= user_idx < cfg.n_users:
        raise IndexError(f"user_idx {user_idx} out of range for {cfg.n_users} users")
    paths = _draw_comm_paths(cfg, rng)
    return comm_channel_from_paths(cfg, paths["aoa"], paths["aod"], paths["gains"])


def _draw_reflector(rng, var) -> dict:
    aoa, aod = rng.uniform(-HALF_PI, HALF_PI, 2)
    return {"aoa": float(aoa), "aod": float(aod), "gain": complex(_complex_gaussian(rng, var))}


def gen_sensing_channels(cfg: ScenarioConfig, rng: np.random.Generator):
    """Draw the target channel and the ``L`` clutter channels.

    Returns
    -------
    target : ndarray, shape (N_r, N_t)
    clutter : list of ndarray, each (N_r, N_t)
    """
    target, clutter, _ = _sensing_with_record(cfg, rng)
    return target, clutter


def _sensing_with_record(cfg, rng):
    tgt = _draw_reflector(rng, cfg.target_gain_var)
    target = _rank_one(tgt["gain"], tgt["aoa"], tgt["aod"], cfg.n_rx, cfg.n_tx)
    clutter, records = [], []
    for var in cfg.clutter_vars:
        rec = _draw_reflector(rng, var)
        clutter.append(_rank_one(rec["gain"], rec["aoa"], rec["aod"], cfg.n_rx, cfg.n_tx))
        records.append(rec)
    return target, clutter, {"target": tgt, "clutter": records}


@dataclass
class ChannelSet:
    """One realization of every channel in the scenario.

    Attributes
    ----------
    comm : list of ndarray
        User channels, each ``(R, N_t)``.
    sense : ndarray
        Target channel ``(N_r, N_t)``.
    clutter : list of ndarray
        Clutter channels, each ``(N_r, N_t)``.
    angles : dict
        Drawn angles and gains, kept for reproducibility.
    """

    comm: list
    sense: np.ndarray
    clutter: list = field(default_factory=list)
    angles: dict = field(default_factory=dict)

    @property
    def n_users(self) -> int:
        return len(self.comm)

    @property
    def n_tx(self) -> int:
        return self.sense.shape[1]

    @property
    def n_rx(self) -> int:
        return self.sense.shape[0]

    def scaled(self, c: complex) -> "ChannelSet":
        return ChannelSet(
            comm=[c * H for H in self.comm],
            sense=c * self.sense,
            clutter=[c * G for G in self.clutter],
            angles=self.angles,
        )

    def permuted(self, order) -> "ChannelSet":
        """Return a copy with users reordered as ``comm[order[i]]``."""
        return ChannelSet(
            comm=[self.comm[i] for i in order],
            sense=self.sense,
            clutter=list(self.clutter),
            angles=self.angles,
        )


def trial_rng(seed: int, trial_idx: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, trial_idx)``.

    ``stream`` separates channel draws (0) from other per-trial randomness
    such as random precoder initialization (1).
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial_idx), int(stream)]))


def sample_scenario(cfg: ScenarioConfig, trial_idx: int) -> ChannelSet:
    """Deterministic channel realization for ``(cfg.seed, trial_idx)``."""
    rng = trial_rng(cfg.seed, trial_idx)
    comm, user_paths = [], []
    for _ in range(cfg.n_users):
        paths = _draw_comm_paths(cfg, rng)
        comm.append(comm_channel_from_paths(cfg, paths["aoa"], paths["aod"], paths["gains"]))
        user_paths.append(paths)
    target, clutter, record = _sensing_with_record(cfg, rng)
    record["users"] = user_paths
    return ChannelSet(comm=comm, sense=target, clutter=clutter, angles=record)
