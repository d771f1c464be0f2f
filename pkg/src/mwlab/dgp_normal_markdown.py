"""Normal-markdown labor market.

Latent log wages in a region are Normal(mu, sigma**2). Firms pay a fraction
``m`` of marginal product, so a worker is employed only if the minimum wage
does not exceed their marginal product: latent log wages below
``mw + log(m)`` are disemployed and those between ``mw + log(m)`` and ``mw``
are paid exactly ``mw`` (the spike). Optionally the minimum wage draws extra
workers into employment just above it, with a triangular wage profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mwlab.probability import (
    MixedWageDistribution,
    TriangularSegment,
    TruncatedNormalSegment,
    normal_cdf,
    normal_interval,
    normal_pdf,
)


class InvalidParameterError(ValueError):
    pass


class DegenerateRegionError(ValueError):
    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


def _first_region(mask):
    """Region (last-axis) index of the first offending entry."""
    return int(np.argwhere(mask)[0][-1]) if np.ndim(mask) else None


@dataclass(frozen=True)
class MarkdownPolicy:
    """Minimum wage and labor market parameters for one region-period.

    ``mw`` may be an array (one entry per region), as may the latent params
    passed to :func:`simulate_region`. The entry bump sits on top of a worker
    measure normalized to one; ``employment_cap=None`` lets employment exceed
    that measure instead of raising.
    """

    mw: np.ndarray | float
    markdown: float = 0.7
    pos_height: float = 0.0
    pos_base: float | None = None
    employment_cap: float | None = 1.0

    def __post_init__(self):
        if not 0.0 < self.markdown <= 1.0:
            raise InvalidParameterError("markdown must lie in (0, 1]")
        if self.pos_height < 0:
            raise InvalidParameterError("pos_height must be nonnegative")
        if self.pos_height > 0 and (self.pos_base is None or self.pos_base <= 0):
            raise InvalidParameterError("pos_base > 0 is required when pos_height > 0")


@dataclass(frozen=True)
class LocalMinWageConfig:
    share_with_local: float = 0.0
    gap_mean: float = 0.25
    gap_sd: float = 0.075
    floor_gap: float = 0.05
    no_reduction: bool = True

    def __post_init__(self):
        if not 0.0 <= self.share_with_local <= 1.0:
            raise InvalidParameterError("share_with_local must lie in [0, 1]")
        if self.gap_sd <= 0:
            raise InvalidParameterError("gap_sd must be positive")
        if self.floor_gap < 0:
            raise InvalidParameterError("floor_gap must be nonnegative")


def added_employment(mu, sigma, policy: MarkdownPolicy):
    """Mass of the triangular entry bump: base * height / 2 times the latent density at mw."""
    if policy.pos_height == 0:
        return np.zeros(np.broadcast_shapes(np.shape(mu), np.shape(sigma), np.shape(policy.mw)))
    z = (policy.mw - np.asarray(mu)) / sigma
    return 0.5 * policy.pos_base * policy.pos_height * normal_pdf(z) / sigma


def simulate_region(mu, sigma, policy: MarkdownPolicy) -> MixedWageDistribution:
    """Observed wage distribution and employment under ``policy``.

    ``mu`` and ``sigma`` are the latent location and dispersion; arrays are
    simulated elementwise.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise InvalidParameterError("latent sigma must be positive")
    mw = np.asarray(policy.mw, dtype=float)
    z_cut = (mw + np.log(policy.markdown) - mu) / sigma
    z_mw = (mw - mu) / sigma

    base_employed = normal_cdf(-z_cut)
    upper = normal_cdf(-z_mw)
    spike = normal_interval(z_cut, z_mw)
    segments = [TruncatedNormalSegment(mean=mu, sd=sigma, lower=mw, mass=upper)]
    extra = added_employment(mu, sigma, policy)
    if policy.pos_height > 0:
        segments.append(TriangularSegment(start=mw, base=policy.pos_base, mass=extra))
    employment = spike + upper + extra

    cap = policy.employment_cap
    if cap is not None and np.any(employment > cap):
        region = _first_region(employment > cap)
        raise InvalidParameterError(f"added employment pushes employment above 1 (region {region})")
    if np.any(employment <= 0.0):
        region = _first_region(employment <= 0.0)
        raise DegenerateRegionError(f"region {region} has no employment at this minimum wage", region)
    shape = np.broadcast_shapes(mu.shape, sigma.shape, mw.shape)
    return MixedWageDistribution(
        spike_point=np.broadcast_to(mw, shape),
        spike_mass=np.broadcast_to(spike, shape),
        segments=tuple(segments),
        employment=np.broadcast_to(employment, shape),
    )


def draw_local_minimum_wages(rng: np.random.Generator, n_regions: int, national, cfg: LocalMinWageConfig):
    """Region-specific log minimum wage paths, shape ``(n_regions, 2)``.

    In each period a fixed-size random subset of regions gets a local minimum
    above the national one. Period-1 local minima never fall below period 0.
    """
    mw0, mw1 = national
    if n_regions < 1:
        raise InvalidParameterError("need at least one region")
    if mw1 < mw0:
        raise InvalidParameterError("national minimum wage path must be nondecreasing")
    out = np.empty((n_regions, 2))
    out[:, 0] = mw0
    out[:, 1] = mw1
    n_local = int(round(cfg.share_with_local * n_regions))
    if n_local == 0:
        return out
    for t, national_t in enumerate((mw0, mw1)):
        chosen = rng.choice(n_regions, size=n_local, replace=False)
        gaps = np.maximum(cfg.floor_gap, rng.normal(cfg.gap_mean, cfg.gap_sd, size=n_local))
        out[chosen, t] = national_t + gaps
    if cfg.no_reduction:
        out[:, 1] = np.maximum(out[:, 1], out[:, 0])
    return out
