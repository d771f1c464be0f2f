"""True average treatment effects of a minimum wage change.

``ATE_0`` holds region parameters at their period-0 values and compares
outcomes under the period-1 and period-0 minimum wages; ``ATE_1`` does the
same at period-1 parameters. The reported ATE is their average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mwlab.estimators import QUANTILES, resolve_outcome
from mwlab.probability import MixedWageDistribution, mixed_quantile


@dataclass
class RegionOutcomes:
    """Employment and log wage quantiles for a batch of region evaluations."""

    employment: np.ndarray
    quantiles: dict

    def quantile(self, q: float) -> np.ndarray:
        for level, values in self.quantiles.items():
            if abs(level - q) < 1e-12:
                return values
        raise KeyError(f"no quantile {q} was computed")

    def outcome(self, name: str) -> np.ndarray:
        return resolve_outcome(name, self.employment, self.quantile)

    def take(self, index) -> "RegionOutcomes":
        return RegionOutcomes(self.employment[index], {q: v[index] for q, v in self.quantiles.items()})


def region_outcomes(d: MixedWageDistribution, levels=QUANTILES) -> RegionOutcomes:
    levels = tuple(levels)
    emp = np.asarray(d.employment, dtype=float)
    q = np.asarray(levels).reshape((-1,) + (1,) * emp.ndim)
    values = mixed_quantile(d, q)
    return RegionOutcomes(emp.copy(), {lvl: values[i] for i, lvl in enumerate(levels)})


@dataclass
class AteReport:
    ate0: dict
    ate1: dict

    @property
    def ate(self) -> dict:
        return {k: 0.5 * (self.ate0[k] + self.ate1[k]) for k in self.ate0}


@dataclass
class OutcomeGrid:
    """Outcomes at every (minimum wage period, parameter period) pair.

    Index ``[i, j]`` of the leading axis pair means minimum wage of period
    ``i`` with region parameters of period ``j``; the diagonal is observed.
    """

    outcomes: RegionOutcomes
    distributions: MixedWageDistribution

    def cell(self, i_mw: int, i_theta: int) -> RegionOutcomes:
        return self.outcomes.take(_cell_index(i_mw, i_theta))


_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


def _cell_index(i_mw, i_theta):
    return _ORDER.index((i_mw, i_theta))


def outcome_grid(dgp, theta0, theta1, mw_path, levels=QUANTILES) -> OutcomeGrid:
    """Evaluate ``dgp(theta, mw)`` on all four cells in one vectorized call.

    ``theta0``/``theta1`` are tuples of per-region arrays; ``mw_path`` is
    ``(R, 2)``. ``dgp`` must broadcast over a leading batch axis.
    """
    theta = tuple(np.stack([a0, a0, a1, a1]) for a0, a1 in zip(theta0, theta1))
    mw_path = np.asarray(mw_path, dtype=float)
    mw = np.stack([mw_path[:, i] for i, _ in _ORDER])
    dist = dgp(theta, mw)
    return OutcomeGrid(outcomes=region_outcomes(dist, levels), distributions=dist)


def ate_from_grid(grid: OutcomeGrid, outcomes) -> AteReport:
    ate0, ate1 = {}, {}
    for name in outcomes:
        v = grid.outcomes.outcome(name)
        ate0[name] = float(np.mean(v[_cell_index(1, 0)] - v[_cell_index(0, 0)]))
        ate1[name] = float(np.mean(v[_cell_index(1, 1)] - v[_cell_index(0, 1)]))
    return AteReport(ate0=ate0, ate1=ate1)


def true_ate(dgp, theta0, theta1, mw_path, outcomes) -> AteReport:
    """Population ATEs of moving every region from ``mw_path[:, 0]`` to ``mw_path[:, 1]``."""
    return ate_from_grid(outcome_grid(dgp, theta0, theta1, mw_path), outcomes)
