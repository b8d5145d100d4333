"""Scenario and sweep configuration.

All physical quantities are stored in linear units. Powers given in dBm are
converted as ``10 ** (x / 10)`` (milliwatt referenced), so 30 dBm -> 1000.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .exceptions import ConfigError

__all__ = [
    "ScenarioConfig",
    "SweepSpec",
    "dbm_to_linear",
    "snr_db_to_power",
    "DEFAULT_OMEGA_GRID",
    "DEFAULT_SNR_GRID_DB",
]

DEFAULT_OMEGA_GRID = (0.0, 0.25, 0.5, 0.75, 0.99)
DEFAULT_SNR_GRID_DB = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)

INIT_STRATEGIES = ("matched", "random")
CONVERGENCE_METRICS = ("rate_abs", "rate_rel", "objective_abs")


def dbm_to_linear(value_dbm: float) -> float:
    return 10.0 ** (value_dbm / 10.0)


def snr_db_to_power(snr_db: float) -> float:
    """Transmit power budget for a given transmit SNR in dB."""
    return 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and algorithmic parameters of one ISAC scenario.

    Parameters
    ----------
    n_tx, n_rx : int
        Antennas at the transmitting base station and at the sensing
        receiver.
    n_users, n_ue_ant : int
        Number of communication users and antennas per user. One stream is
        sent per user antenna.
    n_sense_streams : int
        Streams dedicated to the sensing target.
    n_paths, n_clutters : int
        Multipath components per user channel and clutter patches.
    noise_power_comm, noise_power_sense : float
        Receiver noise variances (linear).
    path_var_los, path_var_nlos : float
        Path-gain variances of the first (LOS) path and of the others.
    target_gain_var : float
        Variance of the target reflection gain.
    clutter_gain_vars : tuple of float or None
        Per-patch clutter gain variances. ``None`` means every patch uses
        ``target_gain_var``.
    power_budget : float
        Total transmit power limit (linear).
    weight_sense : float
        Sensing weight in ``[0, 1)``.
    weights_comm : tuple of float or None
        Per-user weights summing to ``1 - weight_sense``. ``None`` means a
        uniform split.
    tol, max_iters :
        Stopping rule of the alternating solver.
    seed : int
        Seed of the channel generator.
    init : {"matched", "random"}
        Precoder initialization.
    convergence_metric : {"rate_abs", "rate_rel", "objective_abs"}
        Quantity compared against ``tol`` between iterations.
    bisection_rtol : float
        Relative power error at which the multiplier search stops.
    carrier_freq_hz : float
        Documentation only; element spacing is fixed at half a wavelength.
    """

    n_tx: int = 16
    n_rx: int = 4
    n_users: int = 3
    n_ue_ant: int = 4
    n_sense_streams: int = 1
    n_paths: int = 10
    n_clutters: int = 3
    noise_power_comm: float = dbm_to_linear(30.0)
    noise_power_sense: float = dbm_to_linear(30.0)
    path_var_los: float = dbm_to_linear(30.0)
    path_var_nlos: float = dbm_to_linear(20.0)
    target_gain_var: float = dbm_to_linear(30.0)
    clutter_gain_vars: Optional[tuple] = None
    power_budget: float = snr_db_to_power(25.0)
    weight_sense: float = 0.5
    weights_comm: Optional[tuple] = None
    tol: float = 1e-3
    max_iters: int = 50
    seed: int = 0
    init: str = "matched"
    convergence_metric: str = "rate_abs"
    bisection_rtol: float = 1e-8
    carrier_freq_hz: float = 3.3e9

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "n_users", "n_ue_ant", "n_sense_streams",
                     "n_paths", "max_iters"):
            value = getattr(self, name)
            if not _is_int(value) or value < 1:
                raise ConfigError(name, f"must be an integer >= 1, got {value!r}")
        if not _is_int(self.n_clutters) or self.n_clutters < 0:
            raise ConfigError("n_clutters", f"must be an integer >= 0, got {self.n_clutters!r}")
        if not _is_int(self.seed):
            raise ConfigError("seed", f"must be an integer, got {self.seed!r}")

        for name in ("noise_power_comm", "noise_power_sense", "path_var_los",
                     "path_var_nlos", "target_gain_var", "power_budget", "tol",
                     "bisection_rtol"):
            value = getattr(self, name)
            if not _is_real(value) or not value > 0 or not math.isfinite(value):
                raise ConfigError(name, f"must be a finite number > 0, got {value!r}")

        if self.clutter_gain_vars is not None:
            vars_ = tuple(float(v) for v in self.clutter_gain_vars)
            if len(vars_) != self.n_clutters:
                raise ConfigError(
                    "clutter_gain_vars",
                    f"expected {self.n_clutters} entries, got {len(vars_)}")
            if any(not (v > 0 and math.isfinite(v)) for v in vars_):
                raise ConfigError("clutter_gain_vars", "all entries must be finite and > 0")
            object.__setattr__(self, "clutter_gain_vars", vars_)

        if not _is_real(self.weight_sense) or not 0.0 <= self.weight_sense < 1.0:
            raise ConfigError("weight_sense", f"must lie in [0, 1), got {self.weight_sense!r}")
        if self.weights_comm is not None:
            w = tuple(float(v) for v in self.weights_comm)
            if len(w) != self.n_users:
                raise ConfigError("weights_comm", f"expected {self.n_users} entries, got {len(w)}")
            if any(v < 0 for v in w):
                raise ConfigError("weights_comm", "entries must be >= 0")
            if abs(sum(w) - (1.0 - self.weight_sense)) > 1e-9:
                raise ConfigError(
                    "weights_comm",
                    f"must sum to 1 - weight_sense = {1.0 - self.weight_sense!r}, got {sum(w)!r}")
            object.__setattr__(self, "weights_comm", w)

        if self.init not in INIT_STRATEGIES:
            raise ConfigError("init", f"must be one of {INIT_STRATEGIES}, got {self.init!r}")
        if self.convergence_metric not in CONVERGENCE_METRICS:
            raise ConfigError(
                "convergence_metric",
                f"must be one of {CONVERGENCE_METRICS}, got {self.convergence_metric!r}")

    @property
    def comm_weights(self) -> tuple:
        """Resolved per-user weights (uniform split unless given)."""
        if self.weights_comm is not None:
            return self.weights_comm
        return tuple((1.0 - self.weight_sense) / self.n_users for _ in range(self.n_users))

    @property
    def clutter_vars(self) -> tuple:
        if self.clutter_gain_vars is not None:
            return self.clutter_gain_vars
        return tuple(self.target_gain_var for _ in range(self.n_clutters))

    @property
    def path_gain_factor(self) -> float:
        """Normalization ``sqrt(N_t * R / P)`` of the multipath channel."""
        return math.sqrt(self.n_tx * self.n_ue_ant / self.n_paths)

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with changes applied.

        Changing ``weight_sense`` without also passing ``weights_comm`` drops
        any explicit per-user weights back to the uniform split, since they
        would no longer sum correctly.
        """
        if "weight_sense" in changes and "weights_comm" not in changes:
            changes["weights_comm"] = None
        if "n_clutters" in changes and "clutter_gain_vars" not in changes:
            changes["clutter_gain_vars"] = None
        return dataclasses.replace(self, **changes)

    def resolved(self) -> dict:
        """Plain dict with every implicit default made explicit."""
        out = dataclasses.asdict(self)
        out["weights_comm"] = list(self.comm_weights)
        out["clutter_gain_vars"] = list(self.clutter_vars)
        return out


@dataclass(frozen=True)
class SweepSpec:
    """Monte-Carlo sweep over sensing weight and transmit SNR."""

    omega_values: tuple = DEFAULT_OMEGA_GRID
    snr_values_db: tuple = DEFAULT_SNR_GRID_DB
    n_trials: int = 500
    base_config: ScenarioConfig = field(default_factory=ScenarioConfig)
    master_seed: int = 0

    def __post_init__(self):
        omegas = tuple(float(w) for w in self.omega_values)
        if not omegas:
            raise ConfigError("omega_values", "must not be empty")
        if any(not 0.0 <= w < 1.0 for w in omegas):
            raise ConfigError("omega_values", f"entries must lie in [0, 1), got {omegas}")
        snrs = tuple(float(s) for s in self.snr_values_db)
        if not snrs or any(not math.isfinite(s) for s in snrs):
            raise ConfigError("snr_values_db", "must be a non-empty list of finite values")
        if not _is_int(self.n_trials) or self.n_trials < 1:
            raise ConfigError("n_trials", f"must be an integer >= 1, got {self.n_trials!r}")
        if not _is_int(self.master_seed):
            raise ConfigError("master_seed", f"must be an integer, got {self.master_seed!r}")
        object.__setattr__(self, "omega_values", omegas)
        object.__setattr__(self, "snr_values_db", snrs)

    def resolved(self) -> dict:
        return {
            "omega_values": list(self.omega_values),
            "snr_values_db": list(self.snr_values_db),
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "base_config": self.base_config.resolved(),
        }


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def scenario_fields() -> Sequence[str]:
    return [f.name for f in dataclasses.fields(ScenarioConfig)]
