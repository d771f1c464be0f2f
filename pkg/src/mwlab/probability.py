"""Mixed (spike + continuous) wage distributions.

Every data-generating process in the package produces an observed log wage
law made of a point mass at the minimum wage plus a handful of continuous
pieces (truncated normals, optionally a right-triangular bump). This module
holds those laws and the exact kernels the simulations need: CDF, quantile,
level moments and partial expectations.

All objects are array-valued: a single ``MixedWageDistribution`` can describe
a whole batch of regions at once, as long as its fields broadcast together.
Masses are unconditional (population) masses; the public functions return
quantities conditional on employment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

MASS_TOL = 1e-12
# The bracket top sits this many sds above the highest segment mean; the
# normal tail beyond it is below 1e-32.
BRACKET_SDS = 12.0


def normal_cdf(z):
    """Standard normal CDF, saturating to 0/1 in the tails."""
    return special.ndtr(z)


def normal_pdf(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)


def normal_quantile(q):
    """Inverse of :func:`normal_cdf` on the open unit interval."""
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0.0) & (q_arr < 1.0))):
        raise ValueError("normal_quantile requires 0 < q < 1")
    return special.ndtri(q_arr)


def _upper_tail(z):
    return special.ndtr(-np.asarray(z, dtype=float))


def _tails(z):
    """(P(Z <= z), P(Z > z)) from one ndtr call, each accurate in its own tail."""
    t = special.ndtr(-np.abs(z))
    neg = z < 0
    return np.where(neg, t, 1.0 - t), np.where(neg, 1.0 - t, t)


def normal_interval(a, b, tails_a=None):
    """P(a < Z <= b) for a <= b, differenced on the tail that keeps precision."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cdf_a, sf_a = _tails(a) if tails_a is None else tails_a
    cdf_b, sf_b = _tails(b)
    middle = np.maximum(1.0 - cdf_a - sf_b, 0.0)
    return np.where(b <= 0, cdf_b - cdf_a, np.where(a >= 0, sf_a - sf_b, middle))


@dataclass(frozen=True)
class NormalParams:
    mean: np.ndarray | float
    sd: np.ndarray | float

    def __post_init__(self):
        if np.any(~(np.asarray(self.sd) > 0)):
            raise ValueError("NormalParams.sd must be strictly positive")


@dataclass(frozen=True)
class TruncatedNormalSegment:
    """Normal(mean, sd**2) restricted to ``[lower, inf)`` carrying ``mass``.

    ``lower`` may be ``-inf`` (no truncation).
    """

    mean: np.ndarray | float
    sd: np.ndarray | float
    lower: np.ndarray | float
    mass: np.ndarray | float
    kind: str = field(default="truncated-normal", init=False)

    @cached_property
    def _z_lower(self):
        return (np.asarray(self.lower, dtype=float) - self.mean) / self.sd

    @cached_property
    def _lower_tails(self):
        return _tails(self._z_lower)

    @cached_property
    def _normalizer(self):
        return self._lower_tails[1]

    def support_low(self):
        return np.asarray(self.lower, dtype=float)

    def support_high(self):
        return np.asarray(self.mean + BRACKET_SDS * np.asarray(self.sd), dtype=float)

    def mass_below(self, w):
        """Unconditional mass on ``(-inf, w]``."""
        w = np.asarray(w, dtype=float)
        a = self._z_lower
        b = np.maximum((w - self.mean) / self.sd, a)
        return self.mass * normal_interval(a, b, self._lower_tails) / self._normalizer

    def level_below(self, w):
        """Unconditional partial level mean, the integral of exp(x) over ``(-inf, w]``."""
        w = np.asarray(w, dtype=float)
        sd2 = np.asarray(self.sd) ** 2
        shift = self.mean + sd2
        a = (np.asarray(self.lower) - shift) / self.sd
        b = np.maximum((w - shift) / self.sd, a)
        inside = normal_interval(a, b)
        return self.mass * np.exp(self.mean + 0.5 * sd2) * inside / self._normalizer

    def level_total(self):
        sd2 = np.asarray(self.sd) ** 2
        a = (np.asarray(self.lower) - self.mean - sd2) / self.sd
        return self.mass * np.exp(self.mean + 0.5 * sd2) * _upper_tail(a) / self._normalizer


@dataclass(frozen=True)
class TriangularSegment:
    """Density falling linearly from its peak at ``start`` to zero at ``start + base``."""

    start: np.ndarray | float
    base: np.ndarray | float
    mass: np.ndarray | float
    kind: str = field(default="triangular", init=False)

    def __post_init__(self):
        if np.any(~(np.asarray(self.base) > 0)):
            raise ValueError("triangular base must be positive")

    def support_low(self):
        return np.asarray(self.start, dtype=float)

    def support_high(self):
        return np.asarray(self.start + np.asarray(self.base), dtype=float)

    def mass_below(self, w):
        x = np.clip(np.asarray(w, dtype=float) - self.start, 0.0, self.base)
        return self.mass * (1.0 - (1.0 - x / self.base) ** 2)

    def level_below(self, w):
        b = np.asarray(self.base, dtype=float)
        x = np.clip(np.asarray(w, dtype=float) - self.start, 0.0, b)
        ex = np.exp(x)
        # int_0^x e^u (1 - u/b) du, scaled by the 2/b density constant
        integral = np.expm1(x) - ((x - 1.0) * ex + 1.0) / b
        return self.mass * np.exp(self.start) * 2.0 / b * integral

    def level_total(self):
        return self.level_below(self.support_high())


@dataclass(frozen=True)
class MixedWageDistribution:
    """Observed log wage law: spike at ``spike_point`` plus continuous segments.

    ``employment`` is the employment-to-population ratio, equal to the spike
    mass plus all segment masses. Use :meth:`validate` to check invariants.
    """

    spike_point: np.ndarray | float
    spike_mass: np.ndarray | float
    segments: tuple
    employment: np.ndarray | float

    def validate(self, max_employment: float = 1.0) -> "MixedWageDistribution":
        total = np.asarray(self.spike_mass, dtype=float)
        for seg in self.segments:
            if np.any(np.asarray(seg.mass) < 0):
                raise ValueError("segment mass must be nonnegative")
            if np.any(seg.support_low() < np.asarray(self.spike_point) - 1e-12):
                raise ValueError("segment support starts below the spike point")
            total = total + seg.mass
        emp = np.asarray(self.employment, dtype=float)
        if np.any(np.abs(total - emp) > MASS_TOL):
            raise ValueError("spike + segment masses do not add up to employment")
        if np.any(~((emp > 0.0) & (emp <= max_employment + MASS_TOL))):
            raise ValueError(f"employment must lie in (0, {max_employment}]")
        if np.any((np.asarray(self.spike_mass) < 0) | (np.asarray(self.spike_mass) > emp + MASS_TOL)):
            raise ValueError("spike mass out of range")
        return self

    def spike_share(self):
        return np.asarray(self.spike_mass, dtype=float) / self.employment

    def _continuous_below(self, w):
        out = 0.0
        for seg in self.segments:
            out = out + seg.mass_below(w)
        return out

    def _level_below(self, w):
        out = 0.0
        for seg in self.segments:
            out = out + seg.level_below(w)
        return out

    def bracket(self):
        lo = np.asarray(self.spike_point, dtype=float)
        hi = lo
        for seg in self.segments:
            hi = np.maximum(hi, seg.support_high())
        return lo, hi


def mixed_cdf(d: MixedWageDistribution, w):
    """P(log wage <= w | employed); zero below the spike point."""
    w = np.asarray(w, dtype=float)
    atom = np.where(w >= d.spike_point, d.spike_mass, 0.0)
    out = (atom + d._continuous_below(w)) / d.employment
    return np.where(w < d.spike_point, 0.0, np.minimum(out, 1.0))


def fraction_below(d: MixedWageDistribution, cutoff):
    """P(log wage < cutoff | employed). Workers exactly at the cutoff are excluded."""
    cutoff = np.asarray(cutoff, dtype=float)
    atom = np.where(cutoff > d.spike_point, d.spike_mass, 0.0)
    return (atom + d._continuous_below(cutoff)) / d.employment


def mean_level(d: MixedWageDistribution):
    """E[exp(w) | employed]."""
    total = np.asarray(d.spike_mass, dtype=float) * np.exp(d.spike_point)
    for seg in d.segments:
        total = total + seg.level_total()
    return total / d.employment


def gap_numerator(d: MixedWageDistribution, cutoff):
    """E[max(exp(cutoff) - exp(w), 0) | employed]."""
    cutoff = np.asarray(cutoff, dtype=float)
    below = cutoff > d.spike_point
    spike_part = np.where(below, d.spike_mass * (np.exp(cutoff) - np.exp(d.spike_point)), 0.0)
    cont_part = np.exp(cutoff) * d._continuous_below(cutoff) - d._level_below(cutoff)
    out = (spike_part + cont_part) / d.employment
    return np.maximum(out, 0.0)


def mixed_quantile(d: MixedWageDistribution, q, xtol: float = 1e-12, max_iter: int = 200):
    """Smallest w with ``mixed_cdf(d, w) >= q``.

    Quantiles absorbed by the spike return the spike point exactly; the rest
    are found by vectorized bisection on ``[spike_point, top of support]``
    until the bracket is narrower than ``xtol`` (or stops shrinking).
    """
    q = np.asarray(q, dtype=float)
    if np.any(~((q > 0.0) & (q < 1.0))):
        raise ValueError("quantile level must lie in (0, 1)")
    lo, hi = d.bracket()
    shape = np.broadcast_shapes(np.shape(lo), np.shape(q), np.shape(d.employment))
    lo = np.broadcast_to(lo, shape).astype(float)
    hi = np.broadcast_to(hi, shape).astype(float)
    emp = np.asarray(d.employment, dtype=float)
    spike = np.asarray(d.spike_mass, dtype=float)
    at_spike = np.broadcast_to(d.spike_share() >= q, shape)

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not np.any((hi - lo > xtol) & (mid > lo) & (mid < hi)):
            break
        # mid > lo >= spike point, so the whole atom is below mid; same
        # arithmetic as mixed_cdf so the result inverts it exactly
        ok = (spike + d._continuous_below(mid)) / emp >= q
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(at_spike, np.broadcast_to(d.spike_point, shape), hi)
