"""Quick invariant and oracle suite on a small scenario (``wmmse-isac check``)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracles
from .channel import sample_scenario, steering_vector
from .config import ScenarioConfig
from .metrics import (
    cmi_rate,
    covariance_sensing,
    covariance_user,
    logdet2_hpd,
    mse_matrices,
    smi_rate,
)
from .solver import (
    SENSE,
    SolverState,
    gradient_check,
    initial_precoder,
    precoder_rhs_and_kernel,
    solve,
    solve_power_multiplier,
    update_combiners,
    update_weights,
)

__all__ = ["CheckResult", "small_scenario", "run_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def small_scenario(**changes) -> ScenarioConfig:
    base = ScenarioConfig(n_tx=8, n_rx=4, n_users=2, n_ue_ant=2, n_paths=4, n_clutters=2,
                          seed=7)
    return base.replace(**changes) if changes else base


def _random_precoder(cfg, rng):
    v = initial_precoder(sample_scenario(cfg, 0), cfg.replace(init="random"), rng)
    return v


def _prepared_state(channels, cfg, v):
    B, _ = update_combiners(channels, v, cfg)
    mse = mse_matrices(channels, v, B, cfg)
    W_c, W_s = update_weights(mse)
    return SolverState(precoder=v, combiners=B, weights_comm=W_c, weight_sense=W_s, mse=mse)


def run_checks(cfg: ScenarioConfig = None, n_instances: int = 5) -> list:
    cfg = small_scenario() if cfg is None else cfg
    rng = np.random.default_rng(cfg.seed)
    results = []

    angles = rng.uniform(-np.pi / 2, np.pi / 2, 20)
    err = max(abs(np.linalg.norm(steering_vector(a, cfg.n_tx)) ** 2 - 1) for a in angles)
    results.append(CheckResult("steering vector unit norm", err < 1e-12, f"max error {err:.2e}"))

    cov_err, id_err, grad_err = 0.0, 0.0, 0.0
    for t in range(n_instances):
        ch = sample_scenario(cfg, t)
        v = _random_precoder(cfg, rng)
        for k in range(cfg.n_users):
            ref = oracles.brute_force_covariance_user(ch.comm, v.comm, v.sense, k,
                                                      cfg.noise_power_comm)
            cov_err = max(cov_err, np.abs(covariance_user(ch, v, k, cfg.noise_power_comm) - ref).max()
                          / np.abs(ref).max())
        ref = oracles.brute_force_covariance_sensing(ch.sense, ch.clutter, v.comm, v.sense,
                                                     cfg.noise_power_sense)
        cov_err = max(cov_err, np.abs(covariance_sensing(ch, v, cfg.noise_power_sense) - ref).max()
                      / np.abs(ref).max())
        state = _prepared_state(ch, cfg, v)
        for k, E in enumerate(state.mse.per_user):
            id_err = max(id_err, abs(cmi_rate(ch, v, k, cfg.noise_power_comm) + logdet2_hpd(E)))
        id_err = max(id_err, abs(smi_rate(ch, v, cfg.noise_power_sense)
                                 + logdet2_hpd(state.mse.sensing)))
        state.lam = float(rng.uniform(0, 1))
        for k in list(range(cfg.n_users)) + [SENSE]:
            grad_err = max(grad_err, gradient_check(ch, state, cfg, k))
    results.append(CheckResult("covariance vs brute force", cov_err < 1e-12,
                               f"max relative error {cov_err:.2e}"))
    results.append(CheckResult("rate-MSE identity", id_err < 1e-8, f"max error {id_err:.2e} bits"))
    results.append(CheckResult("gradient vs finite differences", grad_err < 1e-4,
                               f"max relative error {grad_err:.2e}"))

    wf_cfg = cfg.replace(n_users=1, n_clutters=0, weight_sense=0.0, tol=1e-10, max_iters=3000)
    wf_gap = 0.0
    for t in range(n_instances):
        ch = sample_scenario(wf_cfg, t)
        state = solve(ch, wf_cfg)
        cap = oracles.waterfill_capacity(ch.comm[0], wf_cfg.noise_power_comm, wf_cfg.power_budget)
        wf_gap = max(wf_gap, abs(cmi_rate(ch, state.precoder, 0, wf_cfg.noise_power_comm) - cap))
    results.append(CheckResult("single-user water-filling", wf_gap < 1e-3,
                               f"max gap {wf_gap:.2e} bits"))

    ok_bisect = True
    for t in range(n_instances):
        ch = sample_scenario(cfg, t)
        state = _prepared_state(ch, cfg, initial_precoder(ch, cfg))
        M, rhs = precoder_rhs_and_kernel(ch, state, cfg)
        V, info = solve_power_multiplier(M, rhs.stacked(), cfg.power_budget, cfg.bisection_rtol)
        if info.active:
            p = np.linalg.norm(V) ** 2
            ok_bisect &= abs(p - cfg.power_budget) <= 1e-6 * cfg.power_budget
            grid = info.lam * np.logspace(-3, 3, 121)
            curve = oracles.power_curve(M, rhs.stacked(), grid)
            ok_bisect &= bool(np.all(np.diff(curve) < 0))
    results.append(CheckResult("power multiplier bisection", bool(ok_bisect),
                               "budget met and power decreasing in multiplier"))

    worst = 0.0
    for t in range(n_instances):
        st = solve(sample_scenario(cfg, t), cfg)
        worst = max(worst, -float(np.min(np.diff(st.rate_trace), initial=0.0)))
    results.append(CheckResult("monotone rate trace", worst < 1e-9,
                               f"largest decrease {worst:.2e}"))

    a, b = sample_scenario(cfg, 3), sample_scenario(cfg, 3)
    same = all(np.array_equal(x, y) for x, y in zip(a.comm + [a.sense] + a.clutter,
                                                     b.comm + [b.sense] + b.clutter))
    results.append(CheckResult("deterministic channel sampling", same, "same seed, same channels"))
    return results
