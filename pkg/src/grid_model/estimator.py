"""
Per-server job consumption rate estimation.

Each server keeps an exponentially weighted moving average of the
seconds one job takes at reference speed:

    estimate <- alpha * duration + (1 - alpha) * estimate

Before any completion is observed the estimate is the configured prior.
"""

import math
from dataclasses import dataclass, replace

from src import config


@dataclass(frozen=True)
class RateEstimator:
    server_id: str
    estimate: float
    alpha: float = config.EWMA_ALPHA
    prior: float = config.DEFAULT_PRIOR_SECONDS
    observations: int = 0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not self.estimate > 0 or not math.isfinite(self.estimate):
            raise ValueError(f"estimate must be a positive finite number, got {self.estimate}")

    @classmethod
    def from_prior(cls, server_id: str, prior: float = config.DEFAULT_PRIOR_SECONDS,
                   alpha: float = config.EWMA_ALPHA) -> 'RateEstimator':
        return cls(server_id=server_id, estimate=prior, alpha=alpha, prior=prior)

    @property
    def jobs_per_hour(self) -> float:
        return 3600.0 / self.estimate


def observe_completion(estimator: RateEstimator, duration: float) -> RateEstimator:
    """
    Fold one observed job duration into the estimate.

    Parameters
    ----------
    estimator : RateEstimator
        Current state
    duration : float
        Observed seconds for one job at reference speed, > 0

    Returns
    -------
    RateEstimator
        New estimator; the input is not modified
    """
    if not duration > 0 or not math.isfinite(duration):
        raise ValueError(f"observed duration must be a positive finite number, got {duration}")
    estimate = estimator.alpha * duration + (1 - estimator.alpha) * estimator.estimate
    return replace(estimator, estimate=estimate, observations=estimator.observations + 1)
