"""Seeded Monte-Carlo campaigns over channel realizations.

Trial ``i`` of a sweep always draws its channels from ``(master_seed, i)``,
so every sweep point sees the same realizations and points can be compared
pairwise. Only the solver inputs (sensing weight, power budget) change.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional

import numpy as np

from .channel import sample_scenario, trial_rng
from .config import ScenarioConfig, SweepSpec, snr_db_to_power
from .exceptions import AggregationError, WMMSEISACError
from .metrics import RateReport, weighted_sum_rate
from .solver import solve

__all__ = [
    "TrialResult",
    "PointStats",
    "SweepResult",
    "run_trial",
    "aggregate",
    "sweep_omega",
    "sweep_snr",
    "sweep_tradeoff",
    "run_sweep",
    "default_workers",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one solve. ``report`` is ``None`` when the trial failed."""

    sweep_param: str
    value: float
    omega: float
    snr_db: float
    trial_idx: int
    report: Optional[RateReport]
    iterations: int = 0
    converged: bool = False
    final_rate_trace: float = float("nan")
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.report is None

    @property
    def point(self) -> tuple:
        return (self.sweep_param, self.value, self.omega, self.snr_db)

    def to_record(self) -> dict:
        rec = {
            "sweep_param": self.sweep_param,
            "value": self.value,
            "omega": self.omega,
            "snr_db": self.snr_db,
            "trial_idx": self.trial_idx,
            "iterations": self.iterations,
            "converged": self.converged,
            "failed": self.failed,
            "error": self.error,
        }
        if self.report is not None:
            rec.update(self.report.to_dict())
            rec["sc_rate"] = self.report.sc_rate
        return rec


@dataclass(frozen=True)
class PointStats:
    sweep_param: str
    value: float
    omega: float
    snr_db: float
    mean_cmi_per_ue: float
    se_cmi: float
    mean_smi: float
    se_smi: float
    mean_sc_rate: float
    se_sc_rate: float
    n_trials: int
    n_failed: int
    mean_iters: float
    frac_not_converged: float
    iterations: tuple = ()


@dataclass
class SweepResult:
    points: List[PointStats]
    trials: List[TrialResult] = field(default_factory=list)

    def point(self, **match) -> PointStats:
        for p in self.points:
            if all(getattr(p, k) == v for k, v in match.items()):
                return p
        raise KeyError(match)


def run_trial(cfg: ScenarioConfig, trial_idx: int):
    """Sample channels for ``trial_idx``, solve, and re-evaluate the rates.

    Returns
    -------
    report : RateReport
        Computed from scratch on the final precoder.
    state : SolverState
    """
    channels = sample_scenario(cfg, trial_idx)
    rng = trial_rng(cfg.seed, trial_idx, stream=1)
    state = solve(channels, cfg, rng=rng)
    return weighted_sum_rate(channels, state.precoder, cfg), state


def _run_task(task) -> TrialResult:
    cfg, trial_idx, (sweep_param, value, omega, snr_db) = task
    try:
        report, state = run_trial(cfg, trial_idx)
    except (WMMSEISACError, np.linalg.LinAlgError) as exc:
        logger.warning("trial %d at %s=%r failed: %s", trial_idx, sweep_param, value, exc)
        return TrialResult(sweep_param, value, omega, snr_db, trial_idx, None,
                           error=f"{type(exc).__name__}: {exc}")
    return TrialResult(sweep_param, value, omega, snr_db, trial_idx, report,
                       iterations=state.iterations, converged=state.converged,
                       final_rate_trace=state.rate_trace[-1])


def _mean_se(x: np.ndarray):
    mean = float(np.mean(x))
    if x.size < 2:
        return mean, float("nan")
    return mean, float(np.std(x, ddof=1) / math.sqrt(x.size))


def aggregate(trials: Iterable[TrialResult]) -> List[PointStats]:
    """Per-point means, standard errors and convergence statistics.

    Failed trials are excluded from the rate means and counted in
    ``n_failed``. Results do not depend on the order of ``trials``.
    """
    groups = {}
    for t in trials:
        groups.setdefault(t.point, []).append(t)

    points = []
    for key in sorted(groups):
        group = sorted(groups[key], key=lambda t: t.trial_idx)
        ok = [t for t in group if not t.failed]
        if not ok:
            raise AggregationError(f"all {len(group)} trials failed at {key[0]}={key[1]!r}")
        cmi = np.array([t.report.mean_comm_rate for t in ok])
        smi = np.array([t.report.sense_rate for t in ok])
        sc = cmi + smi
        iters = np.array([t.iterations for t in ok])
        m_cmi, se_cmi = _mean_se(cmi)
        m_smi, se_smi = _mean_se(smi)
        m_sc, se_sc = _mean_se(sc)
        points.append(PointStats(
            sweep_param=key[0], value=key[1], omega=key[2], snr_db=key[3],
            mean_cmi_per_ue=m_cmi, se_cmi=se_cmi,
            mean_smi=m_smi, se_smi=se_smi,
            mean_sc_rate=m_sc, se_sc_rate=se_sc,
            n_trials=len(group), n_failed=len(group) - len(ok),
            mean_iters=float(np.mean(iters)),
            frac_not_converged=float(np.mean([not t.converged for t in ok])),
            iterations=tuple(int(i) for i in iters),
        ))
    return points


def default_workers() -> int:
    return os.cpu_count() or 1


def _execute(tasks: list, workers: int, progress: Optional[Callable] = None) -> List[TrialResult]:
    if workers <= 1:
        results = []
        for i, task in enumerate(tasks, 1):
            results.append(_run_task(task))
            if progress is not None:
                progress(i, len(tasks))
        return results
    chunksize = max(1, len(tasks) // (8 * workers))
    results = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for i, res in enumerate(pool.map(_run_task, tasks, chunksize=chunksize), 1):
            results.append(res)
            if progress is not None:
                progress(i, len(tasks))
    return results


def _point_config(spec: SweepSpec, omega: float, snr_db: Optional[float]) -> ScenarioConfig:
    changes = {"weight_sense": omega, "seed": spec.master_seed}
    if snr_db is not None:
        changes["power_budget"] = snr_db_to_power(snr_db)
    return spec.base_config.replace(**changes)


def _snr_of(cfg: ScenarioConfig) -> float:
    return 10.0 * math.log10(cfg.power_budget)


def run_sweep(spec: SweepSpec, which: str, workers: int = 1,
              progress: Optional[Callable] = None) -> SweepResult:
    """Run ``which`` in ``{"omega", "snr", "tradeoff"}``.

    ``omega`` varies the sensing weight at the base config's power budget.
    ``snr`` and ``tradeoff`` both cover the full weight x SNR grid; ``snr``
    labels rows by SNR, ``tradeoff`` by weight.
    """
    tasks = []
    if which == "omega":
        for omega in spec.omega_values:
            cfg = _point_config(spec, omega, None)
            key = ("omega", omega, omega, _snr_of(cfg))
            tasks.extend((cfg, i, key) for i in range(spec.n_trials))
    elif which in ("snr", "tradeoff"):
        for snr in spec.snr_values_db:
            for omega in spec.omega_values:
                cfg = _point_config(spec, omega, snr)
                key = ("snr_db", snr, omega, snr) if which == "snr" else ("omega", omega, omega, snr)
                tasks.extend((cfg, i, key) for i in range(spec.n_trials))
    else:
        raise ValueError(f"unknown sweep {which!r}; expected omega, snr or tradeoff")
    trials = _execute(tasks, workers, progress)
    return SweepResult(points=aggregate(trials), trials=trials)


def sweep_omega(spec: SweepSpec, workers: int = 1, progress=None) -> SweepResult:
    """Average rates versus sensing weight at the base power budget."""
    return run_sweep(spec, "omega", workers, progress)


def sweep_snr(spec: SweepSpec, workers: int = 1, progress=None) -> SweepResult:
    """Average S&C rate versus SNR for each configured sensing weight."""
    return run_sweep(spec, "snr", workers, progress)


def sweep_tradeoff(spec: SweepSpec, workers: int = 1, progress=None) -> SweepResult:
    """Sensing-weight sweep repeated at every configured SNR."""
    return run_sweep(spec, "tradeoff", workers, progress)
