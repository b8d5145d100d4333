import numpy as np
import pytest

from wmmse_isac.channel import sample_scenario
from wmmse_isac.config import ScenarioConfig
from wmmse_isac.metrics import Precoder


@pytest.fixture
def small_cfg():
    return ScenarioConfig(n_tx=8, n_rx=4, n_users=2, n_ue_ant=2, n_paths=4, n_clutters=2, seed=3)


@pytest.fixture
def default_cfg():
    return ScenarioConfig()


@pytest.fixture
def small_channels(small_cfg):
    return sample_scenario(small_cfg, 0)


def random_precoder(cfg, rng, power=None):
    def cn(shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    v = Precoder([cn((cfg.n_tx, cfg.n_ue_ant)) for _ in range(cfg.n_users)],
                 cn((cfg.n_tx, cfg.n_sense_streams)))
    power = cfg.power_budget if power is None else power
    return v.scaled(np.sqrt(power / v.total_power()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def report_line():
    """Record one acceptance verdict line; all lines are echoed in the terminal summary."""
    def record(number, name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
