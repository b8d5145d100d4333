"""WMMSE transceiver design for integrated sensing and communication."""

__version__ = "0.1.0"

from .channel import ChannelSet, gen_comm_channel, gen_sensing_channels, sample_scenario, steering_vector
from .config import ScenarioConfig, SweepSpec, dbm_to_linear, snr_db_to_power
from .estimator import WMMSEISACBeamformer
from .exceptions import AggregationError, ConditioningError, ConfigError, SolverError
from .metrics import Precoder, RateReport, weighted_sum_rate
from .solver import SolverState, solve

__all__ = [
    "ChannelSet",
    "ScenarioConfig",
    "SweepSpec",
    "Precoder",
    "RateReport",
    "SolverState",
    "WMMSEISACBeamformer",
    "AggregationError",
    "ConditioningError",
    "ConfigError",
    "SolverError",
    "dbm_to_linear",
    "gen_comm_channel",
    "gen_sensing_channels",
    "sample_scenario",
    "snr_db_to_power",
    "solve",
    "steering_vector",
    "weighted_sum_rate",
]
