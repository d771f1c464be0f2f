"""Cross-region meta-distributions of latent wage parameters.

Regions draw ``[mu_0, sigma_0, mu_1, sigma_1]`` from a 4-variate normal whose
moments were calibrated on US state-level wage data, and, for the canonical
model, a skilled-worker share from a clamped normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORDER = ("mu0", "sigma0", "mu1", "sigma1")
# Column order of the pairwise correlations in the calibration tables.
_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class MetaDistribution:
    mean: tuple
    sd: tuple
    corr: tuple

    def __post_init__(self):
        corr = self.corr_matrix()
        if corr.shape != (4, 4) or len(self.mean) != 4 or len(self.sd) != 4:
            raise ConfigurationError("meta-distribution must be 4-dimensional")
        if not np.allclose(corr, corr.T) or not np.allclose(np.diag(corr), 1.0):
            raise ConfigurationError("correlation matrix must be symmetric with unit diagonal")
        if np.any(np.asarray(self.sd) < 0):
            raise ConfigurationError("standard deviations must be nonnegative")
        eig = np.linalg.eigvalsh(corr)
        if eig[0] < -1e-10:
            raise ConfigurationError(f"correlation matrix is not PSD (eigenvalue {eig[0]:.4g})")

    @classmethod
    def from_table(cls, sigma0, sigma1, sd, pair_corrs):
        """Build from a calibration-table row: mean sigmas, four sds, six correlations."""
        corr = np.eye(4)
        for (i, j), c in zip(_PAIRS, pair_corrs):
            corr[i, j] = corr[j, i] = c
        return cls(
            mean=(0.0, float(sigma0), 0.0, float(sigma1)),
            sd=tuple(float(x) for x in sd),
            corr=tuple(tuple(float(x) for x in row) for row in corr),
        )

    def corr_matrix(self) -> np.ndarray:
        return np.asarray(self.corr, dtype=float)

    def covariance(self) -> np.ndarray:
        sd = np.asarray(self.sd, dtype=float)
        return self.corr_matrix() * np.outer(sd, sd)

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "sd": list(self.sd), "corr": [list(r) for r in self.corr]}

    @classmethod
    def from_dict(cls, d: dict) -> "MetaDistribution":
        return cls(
            mean=tuple(float(x) for x in d["mean"]),
            sd=tuple(float(x) for x in d["sd"]),
            corr=tuple(tuple(float(x) for x in row) for row in d["corr"]),
        )


@dataclass(frozen=True)
class SkillShareMeta:
    mean: float = 0.224
    sd: float = 0.047
    clamp: tuple = (0.01, 0.99)

    def __post_init__(self):
        if not self.clamp[0] < self.clamp[1]:
            raise ConfigurationError("skill-share clamp bounds must be ordered")
        if self.sd < 0:
            raise ConfigurationError("skill-share sd must be nonnegative")


def _factor(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(cov)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def draw_region_params(meta: MetaDistribution, n_regions: int, rng: np.random.Generator, max_rounds: int = 1000):
    """Draw ``n_regions`` rows of ``(mu0, sigma0, mu1, sigma1)``.

    Zero-sd coordinates are set to their mean exactly. Rows with a
    nonpositive sigma are redrawn (not clamped).
    """
    mean = np.asarray(meta.mean, dtype=float)
    sd = np.asarray(meta.sd, dtype=float)
    active = np.flatnonzero(sd > 0)
    out = np.tile(mean, (n_regions, 1))
    if active.size == 0:
        return out
    chol = _factor(meta.covariance()[np.ix_(active, active)])

    todo = np.arange(n_regions)
    for _ in range(max_rounds):
        z = rng.standard_normal((todo.size, active.size))
        out[np.ix_(todo, active)] = mean[active] + z @ chol.T
        bad = (out[todo, 1] <= 0) | (out[todo, 3] <= 0)
        todo = todo[bad]
        if todo.size == 0:
            return out
    raise ConfigurationError("could not draw positive dispersion parameters")


def draw_skill_shares(meta: SkillShareMeta, n_regions: int, rng: np.random.Generator) -> np.ndarray:
    if n_regions < 1:
        raise ConfigurationError("need at least one region")
    draws = rng.normal(meta.mean, meta.sd, size=n_regions) if meta.sd > 0 else np.full(n_regions, meta.mean)
    return np.clip(draws, *meta.clamp)


def _row(sigma0, sigma1, sd, corrs):
    return MetaDistribution.from_table(sigma0, sigma1, sd, corrs)


# Calibration tables for the Normal-markdown model. Keys name the table rows;
# values are (mean sigma0, mean sigma1, sds of (mu0, sigma0, mu1, sigma1),
# correlations in the order mu0-sigma0, mu0-mu1, mu0-sigma1, sigma0-mu1,
# sigma0-sigma1, mu1-sigma1).
META_PRESETS = {
    "location_only": _row(0.542, 0.510, (0.123, 0.0, 0.112, 0.0), (0, 0.894, 0, 0, 0, 0)),
    "location_dispersion": _row(0.542, 0.510, (0.123, 0.026, 0.112, 0.049), (0, 0.894, 0, 0, 0.456, 0)),
    "dispersion_x1_5": _row(0.542, 0.510, (0.123, 0.039, 0.112, 0.074), (0, 0.894, 0, 0, 0.456, 0)),
    "contemporaneous_corr": _row(0.542, 0.510, (0.123, 0.026, 0.112, 0.049), (0.076, 0.894, 0, 0, 0.456, 0.076)),
    "full_us_corr": _row(0.542, 0.510, (0.123, 0.026, 0.112, 0.049), (0.076, 0.894, 0.366, 0.063, 0.456, 0.264)),
    "fixed_location": _row(0.526, 0.526, (0.118, 0.0, 0.118, 0.0), (0, 0.999, 0, 0, 0, 0)),
    "location_shocks": _row(0.526, 0.526, (0.118, 0.0, 0.118, 0.0), (0, 0.894, 0, 0, 0, 0)),
    "stable_dispersion_shocks": _row(0.526, 0.526, (0.118, 0.038, 0.118, 0.038), (0, 0.894, 0, 0, 0.456, 0)),
    "falling_dispersion": _row(0.542, 0.510, (0.118, 0.038, 0.118, 0.038), (0, 0.894, 0, 0, 0.456, 0)),
}
