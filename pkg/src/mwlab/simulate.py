"""Monte Carlo driver: one replication builds a panel, computes truths and runs every estimator."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from mwlab import rng as rngmod
from mwlab.dgp_canonical import CanonicalParams, calibrate_alpha, canonical_outcomes
from mwlab.dgp_normal_markdown import LocalMinWageConfig, MarkdownPolicy, draw_local_minimum_wages, simulate_region
from mwlab.estimators import Panel, estimate
from mwlab.probability import fraction_below, gap_numerator, mean_level
from mwlab.region_sampler import SkillShareMeta, draw_region_params, draw_skill_shares
from mwlab.scenarios import ScenarioConfig
from mwlab.truth import AteReport, ate_from_grid, outcome_grid


class ReplicationError(RuntimeError):
    def __init__(self, message, scenario=None, replication=None, region=None):
        super().__init__(message)
        self.scenario = scenario
        self.replication = replication
        self.region = region


@dataclass
class ReplicationResult:
    replication: int
    truth: AteReport
    estimates: dict  # label -> outcome -> RegressionResult
    panel: Panel | None = None


@dataclass
class McSummary:
    """Means over replications, keyed by outcome and (estimator label, outcome)."""

    scenario: str
    table: str
    panel: str
    description: str
    seed: int
    reps: int
    outcomes: list
    estimators: list
    true_ate: dict
    est_ate: dict
    se: dict
    est_sd: dict = field(default_factory=dict)
    true_sd: dict = field(default_factory=dict)


@lru_cache(maxsize=None)
def _alpha(elast, D, s_bar, mw_low, target_gap):
    return calibrate_alpha(elast, D=D, s_bar=s_bar, mw_low=mw_low, target_gap=target_gap)


def canonical_alpha(cfg: ScenarioConfig) -> float:
    c = cfg.canonical
    if c.alpha is not None:
        return c.alpha
    return _alpha(c.elast, c.D, c.skill_mean, c.calibration_mw, c.target_gap)


def _world(cfg: ScenarioConfig, index: int):
    """Region draws, minimum wage paths and the vectorized outcome map for one replication."""
    R = cfg.regions
    if cfg.dgp == "normal-markdown":
        theta = draw_region_params(cfg.meta_distribution(), R, rngmod.stream(cfg.seed, index, "regions"))
        theta0 = (theta[:, 0], theta[:, 1])
        theta1 = (theta[:, 2], theta[:, 3])

        def dgp(th, mw):
            policy = MarkdownPolicy(
                mw=mw,
                markdown=cfg.markdown,
                pos_height=cfg.pos_height,
                pos_base=cfg.pos_base,
                employment_cap=cfg.employment_cap,
            )
            return simulate_region(th[0], th[1], policy)

    else:
        c = cfg.canonical
        meta = SkillShareMeta(mean=c.skill_mean, sd=c.skill_sd, clamp=tuple(c.skill_clamp))
        s = draw_skill_shares(meta, R, rngmod.stream(cfg.seed, index, "skills"))
        theta0 = theta1 = (s,)
        alpha = canonical_alpha(cfg)

        def dgp(th, mw):
            return canonical_outcomes(CanonicalParams(alpha=alpha, elast=c.elast, D=c.D, s=th[0]), mw)

    mw_path = np.empty((R, 2))
    mw_path[:, 0] = cfg.mw0
    mw_path[:, 1] = cfg.mw1
    if cfg.local_mw is not None and cfg.local_mw.share_with_local > 0:
        lcfg = LocalMinWageConfig(**vars(cfg.local_mw))
        mw_path = draw_local_minimum_wages(rngmod.stream(cfg.seed, index, "local_mw"), R, (cfg.mw0, cfg.mw1), lcfg)
    return dgp, theta0, theta1, mw_path


def run_replication(cfg: ScenarioConfig, index: int, keep_panel: bool = False) -> ReplicationResult:
    try:
        dgp, theta0, theta1, mw_path = _world(cfg, index)
        grid = outcome_grid(dgp, theta0, theta1, mw_path)
        truth = ate_from_grid(grid, cfg.outcomes)

        # Treatment intensities from the initial-period distribution
        cutoff = mw_path[:, 1] + (cfg.intensity_mw1 - cfg.mw1)
        d = grid.distributions
        fa = fraction_below(d, cutoff[None, :])[0]
        gap = gap_numerator(d, cutoff[None, :])[0] / mean_level(d)[0]

        obs0, obs1 = grid.cell(0, 0), grid.cell(1, 1)
        panel = Panel(
            employment=np.column_stack([obs0.employment, obs1.employment]),
            quantiles={q: np.column_stack([obs0.quantiles[q], obs1.quantiles[q]]) for q in obs0.quantiles},
            mw=mw_path,
            fa=np.asarray(fa, dtype=float),
            gap=np.asarray(gap, dtype=float),
        )
        estimates = {e.label: estimate(panel, e.design, cfg.outcomes, **e.options) for e in cfg.estimators}
    except Exception as exc:
        region = getattr(exc, "region", None)
        where = f"scenario {cfg.name!r}, replication {index}" + (f", region {region}" if region is not None else "")
        raise ReplicationError(f"{where}: {exc}", cfg.name, index, region) from exc
    return ReplicationResult(index, truth, estimates, panel if keep_panel else None)


def _run_chunk(args):
    cfg, indices = args
    return [run_replication(cfg, i) for i in indices]


def summarize(cfg: ScenarioConfig, results: list) -> McSummary:
    """Ordered reduction of replication results (sorted by index before averaging)."""
    results = sorted(results, key=lambda r: r.replication)
    labels = [e.label for e in cfg.estimators]
    true_ate, true_sd, est, se, est_sd = {}, {}, {}, {}, {}
    for o in cfg.outcomes:
        t = np.array([r.truth.ate[o] for r in results])
        true_ate[o] = float(t.mean())
        true_sd[o] = float(t.std(ddof=1)) if t.size > 1 else 0.0
        for lab in labels:
            a = np.array([r.estimates[lab][o].ate for r in results])
            s = np.array([r.estimates[lab][o].ate_se for r in results])
            est[(lab, o)] = float(a.mean())
            se[(lab, o)] = float(s.mean())
            est_sd[(lab, o)] = float(a.std(ddof=1)) if a.size > 1 else 0.0
    return McSummary(
        scenario=cfg.name,
        table=cfg.table,
        panel=cfg.panel,
        description=cfg.description,
        seed=cfg.seed,
        reps=len(results),
        outcomes=list(cfg.outcomes),
        estimators=labels,
        true_ate=true_ate,
        est_ate=est,
        se=se,
        est_sd=est_sd,
        true_sd=true_sd,
    )


def run_scenario(cfg: ScenarioConfig, replications: int | None = None, workers: int = 1) -> McSummary:
    """Run ``replications`` (default ``cfg.replications``) and average.

    Results do not depend on ``workers``: every replication owns its random
    streams and the reduction runs in replication order.
    """
    n = cfg.replications if replications is None else replications
    if n < 1:
        raise ValueError("need at least one replication")
    if cfg.dgp == "canonical":
        canonical_alpha(cfg)
    if workers <= 1:
        results = [run_replication(cfg, i) for i in range(n)]
    else:
        chunks = [(cfg, list(range(i, n, workers))) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
    return summarize(cfg, results)
