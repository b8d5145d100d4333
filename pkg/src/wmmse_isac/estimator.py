"""scikit-learn style front end for the WMMSE-ISAC solver."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .channel import ChannelSet
from .config import ScenarioConfig
from .metrics import Precoder, RateReport, weighted_sum_rate
from .solver import solve
from .validation import check_channel_set, check_precoder

__all__ = ["WMMSEISACBeamformer"]

_OVERRIDABLE = ("weight_sense", "power_budget", "tol", "max_iters", "init")


class WMMSEISACBeamformer(BaseEstimator):
    """Joint ISAC transceiver design as an estimator.

    ``fit`` takes one :class:`~wmmse_isac.channel.ChannelSet` and optimizes
    the transmit precoders, receive combiners and MSE weights for it.
    Parameters left as ``None`` fall back to ``config``, so
    ``set_params(weight_sense=0.75)`` sweeps a single knob without rebuilding
    the scenario.

    Parameters
    ----------
    config : ScenarioConfig, optional
        Base scenario; defaults to ``ScenarioConfig()``.
    weight_sense, power_budget, tol, max_iters, init :
        Overrides of the matching ``config`` fields.
    random_state : int or Generator, optional
        Only used with ``init="random"``.

    Attributes
    ----------
    precoder_ : Precoder
    state_ : SolverState
    rate_report_ : RateReport
        Rates of ``precoder_`` on the training channels.
    n_iter_ : int
    converged_ : bool
    """

    def __init__(self, config: Optional[ScenarioConfig] = None, weight_sense=None,
                 power_budget=None, tol=None, max_iters=None, init=None,
                 random_state=None):
        self.config = config
        self.weight_sense = weight_sense
        self.power_budget = power_budget
        self.tol = tol
        self.max_iters = max_iters
        self.init = init
        self.random_state = random_state

    def resolved_config(self) -> ScenarioConfig:
        base = self.config if self.config is not None else ScenarioConfig()
        changes = {name: getattr(self, name) for name in _OVERRIDABLE
                   if getattr(self, name) is not None}
        return base.replace(**changes) if changes else base

    def fit(self, X: ChannelSet, y=None, init_precoder: Optional[Precoder] = None):
        cfg = self.resolved_config()
        channels = check_channel_set(X, cfg)
        if init_precoder is not None:
            init_precoder = check_precoder(init_precoder, cfg)
        rng = self.random_state
        if rng is not None and not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        state = solve(channels, cfg, init=init_precoder, rng=rng)
        self.state_ = state
        self.precoder_ = state.precoder
        self.n_iter_ = state.iterations
        self.converged_ = state.converged
        self.rate_report_ = weighted_sum_rate(channels, state.precoder, cfg)
        return self

    def _check_fitted(self):
        if not hasattr(self, "precoder_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def predict(self, X: Optional[ChannelSet] = None) -> Precoder:
        """Fitted precoder. ``X`` is only validated for shape compatibility."""
        self._check_fitted()
        if X is not None:
            check_channel_set(X, self.resolved_config())
        return self.precoder_

    def fit_predict(self, X: ChannelSet, y=None) -> Precoder:
        return self.fit(X).precoder_

    def rate_report(self, X: ChannelSet) -> RateReport:
        """Rates achieved by the fitted precoder on channels ``X``."""
        self._check_fitted()
        cfg = self.resolved_config()
        return weighted_sum_rate(check_channel_set(X, cfg), self.precoder_, cfg)

    def score(self, X: ChannelSet, y=None) -> float:
        """Weighted sensing and communication sum rate (bits), higher is better."""
        return self.rate_report(X).weighted_sum
