import math

import pytest

from wmmse_isac.config import ScenarioConfig, SweepSpec, dbm_to_linear, snr_db_to_power
from wmmse_isac.exceptions import ConfigError


def test_dbm_conversion():
    assert dbm_to_linear(30.0) == pytest.approx(1000.0)
    assert dbm_to_linear(20.0) == pytest.approx(100.0)
    assert snr_db_to_power(25.0) == pytest.approx(10 ** 2.5)


def test_defaults_match_simulation_setup():
    cfg = ScenarioConfig()
    assert (cfg.n_tx, cfg.n_rx, cfg.n_users, cfg.n_ue_ant) == (16, 4, 3, 4)
    assert (cfg.n_sense_streams, cfg.n_clutters, cfg.n_paths) == (1, 3, 10)
    assert cfg.noise_power_comm == pytest.approx(1000.0)
    assert cfg.noise_power_sense == pytest.approx(1000.0)
    assert cfg.path_var_los == pytest.approx(1000.0)
    assert cfg.path_var_nlos == pytest.approx(100.0)
    assert cfg.target_gain_var == pytest.approx(1000.0)
    assert cfg.tol == 1e-3
    assert cfg.max_iters == 50
    # mean clutter variance equals the target variance
    assert sum(cfg.clutter_vars) / cfg.n_clutters == pytest.approx(cfg.target_gain_var)


def test_uniform_comm_weights():
    cfg = ScenarioConfig(weight_sense=0.5)
    assert cfg.comm_weights == pytest.approx((0.5 / 3,) * 3)
    assert sum(cfg.comm_weights) + cfg.weight_sense == pytest.approx(1.0)


def test_replace_weight_sense_resets_explicit_weights():
    cfg = ScenarioConfig(weight_sense=0.4, weights_comm=(0.2, 0.2, 0.2))
    out = cfg.replace(weight_sense=0.1)
    assert out.weights_comm is None
    assert sum(out.comm_weights) == pytest.approx(0.9)


def test_path_gain_factor():
    # sqrt(16 * 4 / 10)
    assert ScenarioConfig().path_gain_factor == pytest.approx(math.sqrt(6.4))
    assert ScenarioConfig().path_gain_factor == pytest.approx(2.5298221281347035)


@pytest.mark.parametrize("changes, key", [
    ({"weight_sense": 1.0}, "weight_sense"),
    ({"weight_sense": -0.1}, "weight_sense"),
    ({"power_budget": 0.0}, "power_budget"),
    ({"noise_power_comm": -1.0}, "noise_power_comm"),
    ({"n_tx": 0}, "n_tx"),
    ({"n_clutters": -1}, "n_clutters"),
    ({"weights_comm": (0.5, 0.5, 0.5)}, "weights_comm"),
    ({"weights_comm": (0.5, 0.5)}, "weights_comm"),
    ({"clutter_gain_vars": (1.0,)}, "clutter_gain_vars"),
    ({"init": "zeros"}, "init"),
    ({"convergence_metric": "gradient"}, "convergence_metric"),
])
def test_invalid_values_name_the_key(changes, key):
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(**changes)
    assert err.value.key == key


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(omega_values=(0.5, 1.0))
    with pytest.raises(ConfigError):
        SweepSpec(n_trials=0)
    spec = SweepSpec(omega_values=[0, 0.5], snr_values_db=[10], n_trials=3)
    assert spec.omega_values == (0.0, 0.5)
    assert spec.resolved()["base_config"]["weights_comm"] == pytest.approx([0.5 / 3] * 3)
