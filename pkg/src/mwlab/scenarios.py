"""Scenario configurations and the built-in preset registry.

A scenario is a plain JSON document (see :class:`ScenarioConfig`). Presets are
named ``tableN_panelX`` and reproduce one panel of a bias table each.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from mwlab.region_sampler import META_PRESETS, MetaDistribution

DGPS = ("normal-markdown", "canonical")
DESIGNS = ("effective_mw", "fa", "gap", "binary", "quadratic", "cross_iv")

GAPS_VS_MEDIAN = ["emp", "p10-p50", "p25-p50", "p90-p50"]
GAPS_VS_P90 = ["emp", "p10-p90", "p25-p90", "p90-p90"]
LEVELS = ["emp", "p10", "p25", "p50", "p90"]
DEFAULT_SEED = 20240917


class ScenarioError(ValueError):
    pass


@dataclass
class EstimatorSpec:
    label: str
    design: str
    options: dict = field(default_factory=dict)


@dataclass
class CanonicalSpec:
    elast: float
    D: float = 0.5
    skill_mean: float = 0.224
    skill_sd: float = 0.047
    skill_clamp: tuple = (0.01, 0.99)
    alpha: float | None = None
    calibration_mw: float = -2.2
    target_gap: float = 0.5


@dataclass
class LocalMinWageSpec:
    share_with_local: float = 0.0
    gap_mean: float = 0.25
    gap_sd: float = 0.075
    floor_gap: float = 0.05
    no_reduction: bool = True


@dataclass
class ScenarioConfig:
    """One Monte Carlo experiment.

    ``meta`` is either a preset name from ``META_PRESETS`` or an inline dict
    with ``mean``, ``sd`` and ``corr``. With ``placebo`` set, the minimum wage
    stays at ``mw0`` (so ``mw1 == mw0``) while FA and Gap intensities are
    measured against ``treatment_mw1``.
    """

    name: str
    dgp: str
    mw0: float
    mw1: float
    outcomes: list
    estimators: list
    table: str = ""
    panel: str = ""
    description: str = ""
    meta: str | dict | None = None
    markdown: float = 0.7
    pos_height: float = 0.0
    pos_base: float | None = None
    employment_cap: float | None = 1.0
    local_mw: LocalMinWageSpec | None = None
    canonical: CanonicalSpec | None = None
    regions: int = 200
    replications: int = 1000
    seed: int = DEFAULT_SEED
    placebo: bool = False
    treatment_mw1: float | None = None

    def __post_init__(self):
        self.estimators = [e if isinstance(e, EstimatorSpec) else EstimatorSpec(**e) for e in self.estimators]
        if isinstance(self.local_mw, dict):
            self.local_mw = LocalMinWageSpec(**self.local_mw)
        if isinstance(self.canonical, dict):
            c = dict(self.canonical)
            if "skill_clamp" in c:
                c["skill_clamp"] = tuple(c["skill_clamp"])
            self.canonical = CanonicalSpec(**c)
        self.outcomes = list(self.outcomes)
        self.validate()

    def validate(self):
        if self.dgp not in DGPS:
            raise ScenarioError(f"unknown dgp {self.dgp!r}; expected one of {DGPS}")
        if self.regions < 2:
            raise ScenarioError("need at least 2 regions")
        if self.replications < 1:
            raise ScenarioError("need at least 1 replication")
        if self.mw1 < self.mw0 or (self.mw1 == self.mw0 and not self.placebo):
            raise ScenarioError("mw1 must exceed mw0 (equality only for placebo scenarios)")
        if self.placebo and self.treatment_mw1 is None:
            raise ScenarioError("placebo scenarios need treatment_mw1")
        if self.dgp == "normal-markdown" and self.meta is None:
            raise ScenarioError("normal-markdown scenarios need a meta-distribution")
        if self.dgp == "canonical" and self.canonical is None:
            raise ScenarioError("canonical scenarios need canonical parameters")
        if self.pos_height > 0 and self.pos_base is None:
            raise ScenarioError("pos_base is required when pos_height > 0")
        for e in self.estimators:
            if e.design not in DESIGNS:
                raise ScenarioError(f"unknown design {e.design!r} in estimator {e.label!r}")
        self.meta_distribution()

    def meta_distribution(self) -> MetaDistribution | None:
        if self.meta is None:
            return None
        if isinstance(self.meta, str):
            try:
                return META_PRESETS[self.meta]
            except KeyError:
                raise ScenarioError(f"unknown meta preset {self.meta!r}") from None
        return MetaDistribution.from_dict(self.meta)

    @property
    def intensity_mw1(self) -> float:
        return self.treatment_mw1 if self.placebo else self.mw1

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        return cls.from_dict(json.loads(text))

    def with_overrides(self, **kw) -> "ScenarioConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _eff(label="Effective min. wage", **opts):
    return EstimatorSpec(label, "effective_mw", opts)


FA = EstimatorSpec("Fraction affected", "fa")
GAP = EstimatorSpec("Gap measure", "gap")

# Triangle parameters for the positive-employment FA/Gap panels, chosen by
# grid search against their reference true effects.
POSITIVE_BASE = 0.25
POSITIVE_HEIGHT = 1.4


def _nm(name, table, panel, meta, mw0, mw1, outcomes, estimators, description="", **kw):
    return ScenarioConfig(
        name=name,
        table=table,
        panel=panel,
        dgp="normal-markdown",
        meta=meta,
        mw0=mw0,
        mw1=mw1,
        outcomes=list(outcomes),
        estimators=list(estimators),
        description=description,
        **kw,
    )


def _build_presets() -> dict:
    p = {}

    def add(cfg):
        p[cfg.name] = cfg

    baseline_panels = {
        "A": ("location_only", -1.0, -0.8, "Only location parameters vary"),
        "B": ("location_dispersion", -1.0, -0.8, "Heterogeneity in dispersion parameters"),
        "C": ("location_dispersion", -1.0, -0.6, "Larger increase in the minimum wage"),
        "D": ("dispersion_x1_5", -1.0, -0.8, "Dispersion heterogeneity scaled by 1.5"),
    }
    for panel, (meta, mw0, mw1, desc) in baseline_panels.items():
        add(_nm(f"table1_panel{panel}", "1", panel, meta, mw0, mw1, GAPS_VS_MEDIAN, [_eff()], desc))
        add(
            _nm(
                f"tableA3_panel{panel}", "A3", panel, meta, mw0, mw1, GAPS_VS_MEDIAN, [_eff()], desc,
                markdown=0.65, pos_height=0.5, pos_base=0.25, employment_cap=None,
            )
        )
        add(
            _nm(
                f"tableA4_panel{panel}", "A4", panel, meta, mw0, mw1, GAPS_VS_MEDIAN, [_eff()], desc,
                markdown=0.6, pos_height=1.0, pos_base=0.25, employment_cap=None,
            )
        )

    for panel, (meta, desc) in {
        "A": ("location_dispersion", "No location-dispersion correlation"),
        "B": ("contemporaneous_corr", "Contemporaneous location-dispersion correlation"),
        "C": ("full_us_corr", "All correlations from US data"),
    }.items():
        add(_nm(f"table2_panel{panel}", "2", panel, meta, -1.0, -0.8, GAPS_VS_MEDIAN, [_eff()], desc))

    add(
        _nm(
            "table3_panelA", "3", "A", "location_dispersion", -1.0, -0.8, GAPS_VS_MEDIAN,
            [
                _eff(),
                _eff("Effective min. wage, no region FE", region_fe=False),
                _eff("Effective min. wage, no time FE", time_fe=False),
            ],
            "Alternative fixed effects specifications",
        )
    )
    add(
        _nm(
            "table4_panelA", "4", "A", "location_dispersion", -1.0, -0.8, GAPS_VS_P90,
            [_eff("Effective min. wage, p90", deflator=0.9)],
            "Percentile 90 as the deflator",
        )
    )

    for panel, share in {"A": 0.0, "B": 0.2, "C": 0.4}.items():
        ests = [_eff("Effective min. wage, OLS")]
        if share > 0:
            ests += [
                _eff("Effective min. wage, two instruments", iv="two"),
                _eff("Effective min. wage, three instruments (AMS)", iv="ams3"),
            ]
        add(
            _nm(
                f"table5_panel{panel}", "5", panel, "contemporaneous_corr", -1.0, -0.8, GAPS_VS_MEDIAN, ests,
                f"{int(share * 100)}% of regions with local min. wage",
                local_mw=LocalMinWageSpec(share_with_local=share),
            )
        )

    fa_gap_panels = {
        "A": (-1.1, -0.9, False, "Initial minimum wage is low"),
        "B": (-0.7, -0.5, False, "Initial minimum wage is high"),
        "C": (-1.1, -0.9, True, "Positive employment effects, low initial minimum wage"),
        "D": (-0.7, -0.5, True, "Positive employment effects, high initial minimum wage"),
    }
    variants = {
        "6": [FA, GAP],
        "A5": [
            EstimatorSpec("Binary, 50% treated", "binary", {"treated_share": 0.5}),
            EstimatorSpec("Binary, 90% treated", "binary", {"treated_share": 0.9}),
        ],
        "A6": [
            EstimatorSpec("FA instrumented by GAP", "cross_iv", {"direction": "FA-by-Gap"}),
            EstimatorSpec("GAP instrumented by FA", "cross_iv", {"direction": "Gap-by-FA"}),
        ],
        "A7": [
            EstimatorSpec("Quadratic on FA", "quadratic", {"intensity": "fa"}),
            EstimatorSpec("Quadratic on GAP", "quadratic", {"intensity": "gap"}),
        ],
    }
    for table, ests in variants.items():
        for panel, (mw0, mw1, positive, desc) in fa_gap_panels.items():
            extra = {}
            if positive:
                extra = {"pos_height": POSITIVE_HEIGHT, "pos_base": POSITIVE_BASE, "employment_cap": None}
            add(_nm(f"table{table}_panel{panel}", table, panel, "fixed_location", mw0, mw1, LEVELS, ests, desc, **extra))

    shock_panels = {
        "A": ("fixed_location", "No idiosyncratic shocks"),
        "B": ("location_shocks", "Shocks to location parameters"),
        "C": ("stable_dispersion_shocks", "Shocks to location and dispersion parameters"),
        "D": ("falling_dispersion", "Average dispersion falls over time"),
    }
    for panel, (meta, desc) in shock_panels.items():
        add(_nm(f"table7_panel{panel}", "7", panel, meta, -1.0, -0.8, LEVELS, [GAP], desc))
        add(_nm(f"tableA8_panel{panel}", "A8", panel, meta, -1.0, -0.8, LEVELS, [FA], desc))
        add(
            _nm(
                f"tableA9_panel{panel}", "A9", panel, meta, -1.0, -1.0, LEVELS, [GAP], desc,
                placebo=True, treatment_mw1=-0.8,
            )
        )

    canonical_panels = {
        "A": (-2.2, 3.0, "Initial minimum wage is low, elast. subs. is 3.0"),
        "B": (-2.2, 1.4, "Initial minimum wage is low, elast. subs. is 1.4"),
        "C": (-1.8, 3.0, "Initial minimum wage is high, elast. subs. is 3.0"),
        "D": (-1.8, 1.4, "Initial minimum wage is high, elast. subs. is 1.4"),
        "E": (-1.5, 3.0, "Initial minimum wage is very high, elast. subs. is 3.0"),
        "F": (-1.5, 1.4, "Initial minimum wage is very high, elast. subs. is 1.4"),
    }
    for panel, (mw0, elast, desc) in canonical_panels.items():
        for table, outcomes, ests in (
            ("A10", LEVELS, [FA, GAP]),
            ("A11", GAPS_VS_MEDIAN, [_eff(), _eff("Effective min. wage, no region FE", region_fe=False)]),
        ):
            add(
                ScenarioConfig(
                    name=f"table{table}_panel{panel}",
                    table=table,
                    panel=panel,
                    dgp="canonical",
                    mw0=mw0,
                    mw1=round(mw0 + 0.2, 10),
                    outcomes=list(outcomes),
                    estimators=list(ests),
                    description=desc,
                    canonical=CanonicalSpec(elast=elast),
                )
            )
    return p


PRESETS = _build_presets()
TABLES = ("1", "2", "3", "4", "5", "6", "7", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11")


def table_presets(table: str) -> list:
    table = table.upper() if table[0].lower() == "a" else table
    if table not in TABLES:
        raise ScenarioError(f"unknown table {table!r}; expected one of {TABLES}")
    return [cfg for cfg in PRESETS.values() if cfg.table == table]


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """A preset by name, or a JSON config file by path."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    path = Path(name_or_path)
    if path.is_file():
        return ScenarioConfig.from_json(path.read_text())
    raise ScenarioError(f"{name_or_path!r} is neither a preset name nor a config file")
