"""Seeded random search over a box of strategy parameters.

Every draw comes from a Philox counter-based generator keyed by the seed and
positioned by ``(trial_index, dimension_index)``, so a trial's parameters do
not depend on which trials ran before it or on which thread ran it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import AllTrialsFailed

log = logging.getLogger(__name__)

OK = "ok"
FAILED = "failed"


@dataclass(frozen=True)
class Dimension:
    name: str
    lower: float
    upper: float
    scale: str = "linear"

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"{self.name}: bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower ({self.lower}) must be below upper ({self.upper})")
        if self.scale != "linear":
            raise ValueError(f"{self.name}: unsupported scale {self.scale!r}")


@dataclass(frozen=True)
class ParamSpace:
    dimensions: tuple[Dimension, ...]

    @classmethod
    def of(cls, **bounds: tuple[float, float]) -> "ParamSpace":
        return cls(tuple(Dimension(name, lo, hi) for name, (lo, hi) in bounds.items()))

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dimensions]


@dataclass(frozen=True)
class Trial:
    index: int
    params: Mapping[str, float]
    objective: Optional[float]
    status: str = OK
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass(frozen=True)
class OptimizationResult:
    best_trial: Trial
    all_trials: tuple[Trial, ...]
    seed: int
    n_trials: int


def uniform01(seed: int, trial_index: int, dim_index: int) -> float:
    """Uniform draw on [0, 1) at counter position ``(trial_index, dim_index)``."""
    bitgen = np.random.Philox(key=seed, counter=[trial_index, dim_index, 0, 0])
    raw = int(bitgen.random_raw())
    return (raw >> 11) * 2.0**-53


def sample_params(space: ParamSpace, seed: int, trial_index: int) -> dict[str, float]:
    params = {}
    for j, dim in enumerate(space.dimensions):
        u = uniform01(seed, trial_index, j)
        value = dim.lower + u * (dim.upper - dim.lower)
        params[dim.name] = min(value, dim.upper)
    return params


def _evaluate(objective: Callable[[dict], float], space: ParamSpace, seed: int, index: int) -> Trial:
    params = sample_params(space, seed, index)
    try:
        value = float(objective(dict(params)))
    except Exception as exc:  # a failed backtest must not stop the search
        log.debug("trial %d failed: %s", index, exc)
        return Trial(index, params, None, FAILED, f"{type(exc).__name__}: {exc}")
    if not math.isfinite(value):
        return Trial(index, params, None, FAILED, f"non-finite objective {value!r}")
    return Trial(index, params, value, OK)


def best_of(trials: Sequence[Trial]) -> Optional[Trial]:
    """Highest finite objective; ties go to the lowest trial index."""
    best = None
    for t in sorted(trials, key=lambda t: t.index):
        if t.ok and (best is None or t.objective > best.objective):
            best = t
    return best


def optimize(
    space: ParamSpace,
    objective: Callable[[dict], float],
    seed: int = 2025,
    n_trials: int = 100,
    workers: int = 1,
) -> OptimizationResult:
    """Evaluate ``n_trials`` random parameter sets and keep the best.

    Args:
        space: Box to sample from.
        objective: Maps a parameter dict to a score to maximize.  Exceptions
            and non-finite scores mark the trial as failed.
        seed: Generator key.
        n_trials: Number of trials, at least 1.
        workers: Threads used to evaluate trials; the result does not depend
            on this value.

    Raises:
        AllTrialsFailed: no trial produced a finite objective.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(lambda i: _evaluate(objective, space, seed, i), range(n_trials)))
    else:
        trials = [_evaluate(objective, space, seed, i) for i in range(n_trials)]
    best = best_of(trials)
    if best is None:
        raise AllTrialsFailed(f"all {n_trials} trials failed; first error: {trials[0].error}")
    return OptimizationResult(best, tuple(trials), seed, n_trials)


def running_best(trials: Sequence[Trial]) -> list[Optional[float]]:
    """Best objective seen after each trial, in index order."""
    out = []
    best = None
    for t in sorted(trials, key=lambda t: t.index):
        if t.ok and (best is None or t.objective > best):
            best = t.objective
        out.append(best)
    return out
