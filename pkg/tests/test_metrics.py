import numpy as np
import pytest

from wmmse_isac import oracles
from wmmse_isac.channel import ChannelSet, sample_scenario, steering_vector
from wmmse_isac.config import ScenarioConfig
from wmmse_isac.metrics import (
    Precoder,
    cmi_rate,
    covariance_sensing,
    covariance_user,
    interference_sensing,
    interference_user,
    logdet2_hpd,
    mse_matrices,
    smi_rate,
    weighted_sum_rate,
)
from wmmse_isac.solver import update_combiners

from conftest import random_precoder


def zero_precoder(cfg):
    return Precoder([np.zeros((cfg.n_tx, cfg.n_ue_ant), complex) for _ in range(cfg.n_users)],
                    np.zeros((cfg.n_tx, cfg.n_sense_streams), complex))


def identity_setup():
    # one user, H = I (R = N_t = 2), V_1 = I, no sensing stream power, unit noise
    cfg = ScenarioConfig(n_tx=2, n_rx=2, n_users=1, n_ue_ant=2, n_paths=1, n_clutters=0,
                         noise_power_comm=1.0, noise_power_sense=1.0, weight_sense=0.0)
    ch = ChannelSet(comm=[np.eye(2, dtype=complex)], sense=np.zeros((2, 2), complex))
    v = Precoder([np.eye(2, dtype=complex)], np.zeros((2, 1), complex))
    return cfg, ch, v


def test_covariance_noise_only(small_cfg, small_channels):
    v = zero_precoder(small_cfg)
    np.testing.assert_allclose(covariance_user(small_channels, v, 1, 3.0), 3.0 * np.eye(2))
    np.testing.assert_allclose(covariance_sensing(small_channels, v, 5.0), 5.0 * np.eye(4))


def test_covariance_identity_case():
    cfg, ch, v = identity_setup()
    np.testing.assert_allclose(covariance_user(ch, v, 0, 1.0), 2.0 * np.eye(2))


@pytest.mark.parametrize("trial", range(5))
def test_covariances_match_brute_force(small_cfg, rng, trial):
    ch = sample_scenario(small_cfg, trial)
    v = random_precoder(small_cfg, rng)
    for k in range(small_cfg.n_users):
        ref = oracles.brute_force_covariance_user(ch.comm, v.comm, v.sense, k, 7.0)
        np.testing.assert_allclose(covariance_user(ch, v, k, 7.0), ref, rtol=1e-12,
                                   atol=1e-12 * np.abs(ref).max())
    ref = oracles.brute_force_covariance_sensing(ch.sense, ch.clutter, v.comm, v.sense, 7.0)
    np.testing.assert_allclose(covariance_sensing(ch, v, 7.0), ref, rtol=1e-12,
                               atol=1e-12 * np.abs(ref).max())


def test_sensing_covariance_without_users_or_clutter():
    cfg = ScenarioConfig(n_tx=4, n_rx=3, n_users=1, n_clutters=0)
    G = 2.0 * np.outer(steering_vector(0.3, 3), steering_vector(-0.2, 4).conj())
    Vt = np.arange(4, dtype=complex).reshape(4, 1)
    ch = ChannelSet(comm=[], sense=G)
    A = covariance_sensing(ch, Precoder([], Vt), 2.0)
    np.testing.assert_allclose(A, G @ Vt @ Vt.conj().T @ G.conj().T + 2.0 * np.eye(3), atol=1e-12)


def test_covariances_hermitian_pd(default_cfg, rng):
    ch = sample_scenario(default_cfg, 4)
    v = random_precoder(default_cfg, rng)
    for A in [covariance_user(ch, v, k, default_cfg.noise_power_comm) for k in range(3)] + \
             [covariance_sensing(ch, v, default_cfg.noise_power_sense)]:
        assert np.abs(A - A.conj().T).max() <= 1e-12 * np.abs(A).max()
        assert np.linalg.eigvalsh(A).min() >= default_cfg.noise_power_comm * (1 - 1e-9)


def test_cmi_zero_precoder(small_cfg, small_channels):
    v = zero_precoder(small_cfg)
    assert cmi_rate(small_channels, v, 0, 1.0) == 0.0


def test_cmi_identity_two_bits():
    cfg, ch, v = identity_setup()
    assert cmi_rate(ch, v, 0, 1.0) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("trial", range(5))
def test_cmi_and_smi_match_eigen_oracle(default_cfg, rng, trial):
    ch = sample_scenario(default_cfg, trial)
    v = random_precoder(default_cfg, rng)
    s2 = default_cfg.noise_power_comm
    for k in range(default_cfg.n_users):
        ref = oracles.eig_logdet2(covariance_user(ch, v, k, s2)) - \
            oracles.eig_logdet2(interference_user(ch, v, k, s2))
        assert cmi_rate(ch, v, k, s2) == pytest.approx(ref, rel=1e-10, abs=1e-10)
    ref = oracles.eig_logdet2(covariance_sensing(ch, v, s2)) - \
        oracles.eig_logdet2(interference_sensing(ch, v, s2))
    assert smi_rate(ch, v, s2) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_smi_zero_sensing_beam(small_cfg, small_channels, rng):
    v = random_precoder(small_cfg, rng)
    v.sense[:] = 0
    assert smi_rate(small_channels, v, 1.0) == 0.0


def test_smi_matched_beam_scalar_snr():
    p0 = 37.0
    a_r, a_t = steering_vector(0.4, 4), steering_vector(-0.7, 8)
    ch = ChannelSet(comm=[], sense=np.outer(a_r, a_t.conj()))
    v = Precoder([], np.sqrt(p0) * a_t.reshape(-1, 1))
    assert smi_rate(ch, v, 1.0) == pytest.approx(np.log2(1 + p0), rel=1e-12)


def test_mse_zero_user_precoder(small_cfg, small_channels, rng):
    v = random_precoder(small_cfg, rng)
    v.comm[0][:] = 0
    B, _ = update_combiners(small_channels, v, small_cfg)
    mse = mse_matrices(small_channels, v, B, small_cfg)
    np.testing.assert_allclose(mse.per_user[0], np.eye(2), atol=1e-14)


def test_mse_identity_case():
    cfg, ch, v = identity_setup()
    B, _ = update_combiners(ch, v, cfg)
    E = mse_matrices(ch, v, B, cfg).per_user[0]
    np.testing.assert_allclose(E, 0.5 * np.eye(2), atol=1e-15)
    assert -logdet2_hpd(E) == pytest.approx(2.0) == pytest.approx(cmi_rate(ch, v, 0, 1.0))


@pytest.mark.parametrize("trial", range(5))
def test_mse_spectrum_and_rate_identity(default_cfg, rng, trial):
    ch = sample_scenario(default_cfg, trial)
    v = random_precoder(default_cfg, rng)
    B, _ = update_combiners(ch, v, default_cfg)
    mse = mse_matrices(ch, v, B, default_cfg)
    rep = weighted_sum_rate(ch, v, default_cfg)
    for E, r in zip(mse.per_user + [mse.sensing], rep.comm_rates + [rep.sense_rate]):
        assert np.abs(E - E.conj().T).max() < 1e-12
        w = np.linalg.eigvalsh(E)
        assert w.min() > 0 and w.max() <= 1 + 1e-12
        assert abs(r + logdet2_hpd(E)) < 1e-8 * max(1.0, r)


def test_weighted_sum_sensing_weight_zero(default_cfg, rng):
    cfg = default_cfg.replace(weight_sense=0.0)
    ch = sample_scenario(cfg, 0)
    rep = weighted_sum_rate(ch, random_precoder(cfg, rng), cfg)
    assert rep.sense_rate > 0
    assert rep.weighted_sum == sum(a * r for a, r in zip(cfg.comm_weights, rep.comm_rates))


def test_weighted_sum_zero_precoder(default_cfg):
    rep = weighted_sum_rate(sample_scenario(default_cfg, 0), zero_precoder(default_cfg), default_cfg)
    assert rep.weighted_sum == 0.0
    assert rep.comm_rates == [0.0, 0.0, 0.0] and rep.sense_rate == 0.0


def test_weighted_sum_double_entry(default_cfg, rng):
    cfg = default_cfg.replace(weight_sense=0.3)
    ch = sample_scenario(cfg, 2)
    v = random_precoder(cfg, rng)
    rep = weighted_sum_rate(ch, v, cfg)
    total = 0.0
    for k in range(3):
        A = oracles.brute_force_covariance_user(ch.comm, v.comm, v.sense, k, cfg.noise_power_comm)
        HV = ch.comm[k] @ v.comm[k]
        total += (0.7 / 3) * (oracles.eig_logdet2(A) - oracles.eig_logdet2(A - HV @ HV.conj().T))
    A = oracles.brute_force_covariance_sensing(ch.sense, ch.clutter, v.comm, v.sense,
                                               cfg.noise_power_sense)
    GV = ch.sense @ v.sense
    total += 0.3 * (oracles.eig_logdet2(A) - oracles.eig_logdet2(A - GV @ GV.conj().T))
    assert rep.weighted_sum == pytest.approx(total, rel=1e-9)
    assert rep.weighted_sum == pytest.approx(
        sum(a * r for a, r in zip(cfg.comm_weights, rep.comm_rates)) + 0.3 * rep.sense_rate,
        abs=1e-10)


@pytest.mark.parametrize("c", [3.0, 0.01 + 0.2j, -5.5j])
def test_rates_invariant_to_joint_scaling(default_cfg, rng, c):
    ch = sample_scenario(default_cfg, 1)
    v = random_precoder(default_cfg, rng)
    base = weighted_sum_rate(ch, v, default_cfg)
    cfg2 = default_cfg.replace(noise_power_comm=default_cfg.noise_power_comm * abs(c) ** 2,
                               noise_power_sense=default_cfg.noise_power_sense * abs(c) ** 2)
    scaled = weighted_sum_rate(ch.scaled(c), v, cfg2)
    np.testing.assert_allclose(scaled.comm_rates, base.comm_rates, rtol=1e-9, atol=1e-9)
    assert scaled.sense_rate == pytest.approx(base.sense_rate, rel=1e-9, abs=1e-9)


def test_cmi_strictly_decreasing_in_noise(default_cfg, rng):
    ch = sample_scenario(default_cfg, 0)
    v = random_precoder(default_cfg, rng)
    rates = [cmi_rate(ch, v, 0, s2) for s2 in (10.0, 100.0, 1000.0, 1e4)]
    assert all(np.diff(rates) < 0)
