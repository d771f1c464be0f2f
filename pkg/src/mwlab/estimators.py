"""Fixed-effects regressions on two-period region panels and the designs built on them.

Panels are stored column-wise: every region-period variable is an ``(R, T)``
array (rows are regions, columns periods). Fixed effects are absorbed by
exact within-transformation, and covariances are clustered by region with
the CR1 small-sample factor ``G/(G-1) * (N-1)/(N-K)``. ``K`` counts the
regressors plus the absorbed parameters that are not nested in the region
clusters (the intercept, and the extra period dummies when time effects are on).

Each design reduces to a set of regressors, optional instruments, and a
weight vector ``g`` such that the predicted average treatment effect is
``g @ coef``. Its standard error is ``sqrt(g' V g)`` (delta method with
``g`` treated as fixed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

QUANTILES = (0.10, 0.25, 0.50, 0.90)
# Relative column norm below which a regressor counts as absorbed or collinear.
RANK_TOL = 1e-9
MAX_CONDITION = 1e10


class DesignError(ValueError):
    pass


class IVError(DesignError):
    def __init__(self, message, condition_number=np.inf):
        super().__init__(message)
        self.condition_number = condition_number


def resolve_outcome(name: str, employment, quantile):
    """Outcome by name: ``emp``, a log wage quantile ``p10``, or a gap such as ``p10-p50``."""
    if name == "emp":
        return employment
    if "-" in name:
        left, right = name.split("-")
        return resolve_outcome(left, employment, quantile) - resolve_outcome(right, employment, quantile)
    if name.startswith("p") and name[1:].isdigit():
        return quantile(int(name[1:]) / 100.0)
    raise KeyError(f"unknown outcome {name!r}")


@dataclass(frozen=True)
class PanelRow:
    region: int
    period: int
    employment: float
    quantiles: dict
    local_mw: float
    fa: float
    gap: float


@dataclass
class Panel:
    """Balanced two-period panel of region outcomes.

    ``quantiles`` maps each level in :data:`QUANTILES` to an ``(R, T)`` array
    of log wages; ``fa`` and ``gap`` are per-region treatment intensities
    measured in the initial period.
    """

    employment: np.ndarray
    quantiles: dict
    mw: np.ndarray
    fa: np.ndarray
    gap: np.ndarray

    @property
    def n_regions(self) -> int:
        return self.employment.shape[0]

    @property
    def n_periods(self) -> int:
        return self.employment.shape[1]

    def quantile(self, q: float) -> np.ndarray:
        for level, values in self.quantiles.items():
            if abs(level - q) < 1e-12:
                return values
        raise KeyError(f"panel has no quantile {q}")

    def outcome(self, name: str) -> np.ndarray:
        return resolve_outcome(name, self.employment, self.quantile)

    def post(self) -> np.ndarray:
        out = np.zeros_like(self.employment)
        out[:, 1:] = 1.0
        return out

    def rows(self):
        for r in range(self.n_regions):
            for t in range(self.n_periods):
                yield PanelRow(
                    region=r,
                    period=t,
                    employment=float(self.employment[r, t]),
                    quantiles={q: float(v[r, t]) for q, v in self.quantiles.items()},
                    local_mw=float(self.mw[r, t]),
                    fa=float(self.fa[r]),
                    gap=float(self.gap[r]),
                )


@dataclass
class RegressionResult:
    names: tuple
    coef: np.ndarray
    vcov: np.ndarray
    ate: float
    ate_se: float
    n_obs: int
    n_clusters: int
    first_stage_rank: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def coefficient(self, name: str) -> float:
        return float(self.coef[self.names.index(name)])

    def se(self, name: str) -> float:
        i = self.names.index(name)
        return float(np.sqrt(self.vcov[i, i]))


@dataclass
class Design:
    regressors: dict
    weights: np.ndarray
    region_fe: bool = True
    time_fe: bool = True
    instruments: dict | None = None


def absorb(a: np.ndarray, region_fe: bool, time_fe: bool) -> np.ndarray:
    """Residualize ``(R, T, ...)`` arrays on the fixed effects (and an intercept)."""
    if region_fe and time_fe:
        return a - a.mean(axis=1, keepdims=True) - a.mean(axis=0, keepdims=True) + a.mean(axis=(0, 1), keepdims=True)
    if region_fe:
        return a - a.mean(axis=1, keepdims=True)
    if time_fe:
        return a - a.mean(axis=0, keepdims=True)
    return a - a.mean(axis=(0, 1), keepdims=True)


def _stack(columns: dict) -> np.ndarray:
    return np.stack([np.asarray(v, dtype=float) for v in columns.values()], axis=-1)


def _check_columns(names, raw, within, what="regressor"):
    """Raise naming the first column with no residual variation or spanned by earlier ones."""
    n = raw.shape[-1]
    raw2 = raw.reshape(-1, n)
    w2 = within.reshape(-1, n)
    basis = []
    for j, name in enumerate(names):
        scale = np.linalg.norm(raw2[:, j])
        col = w2[:, j] / scale if scale > 0 else w2[:, j]
        if scale == 0 or np.linalg.norm(col) < RANK_TOL:
            raise DesignError(f"{what} {name!r} has no variation after fixed-effect absorption")
        for b in basis:
            col = col - (b @ col) * b
        if np.linalg.norm(col) < RANK_TOL:
            raise DesignError(f"{what} {name!r} is collinear with the preceding columns")
        basis.append(col / np.linalg.norm(col))


def _cluster_vcov(xs, u, bread, n_absorbed):
    """CR1 region-clustered sandwich for each outcome column of ``u``.

    ``xs``: (R, T, k) score regressors; ``u``: (R, T, n) residuals.
    """
    G, T, k = xs.shape
    N = G * T
    K = k + n_absorbed
    factor = G / (G - 1) * (N - 1) / (N - K)
    scores = np.einsum("gtk,gto->ogk", xs, u)
    meat = np.einsum("ogk,ogl->okl", scores, scores)
    vcov = factor * bread @ meat @ bread
    return 0.5 * (vcov + np.swapaxes(vcov, 1, 2))


def _n_absorbed(region_fe, time_fe, n_periods):
    # Region effects are nested in the clusters and do not count towards K.
    return n_periods if time_fe else 1


def _fit(Y, design: Design):
    """Fit one design to outcome stack ``Y`` of shape (R, T, n)."""
    names = tuple(design.regressors)
    X = _stack(design.regressors)
    Xw = absorb(X, design.region_fe, design.time_fe)
    Yw = absorb(Y, design.region_fe, design.time_fe)
    _check_columns(names, X, Xw)
    G, T, k = Xw.shape
    Xf = Xw.reshape(G * T, k)
    Yf = Yw.reshape(G * T, -1)
    rank = None

    if design.instruments is None:
        xtx = Xf.T @ Xf
        coef = np.linalg.solve(xtx, Xf.T @ Yf)
        score_x = Xw
        bread = np.linalg.inv(xtx)
    else:
        inames = tuple(design.instruments)
        if len(inames) < k:
            raise IVError(f"{len(inames)} instruments for {k} endogenous regressors")
        Z = _stack(design.instruments)
        Zw = absorb(Z, design.region_fe, design.time_fe)
        try:
            _check_columns(inames, Z, Zw, what="instrument")
        except DesignError as exc:
            raise IVError(str(exc)) from None
        Zf = Zw.reshape(G * T, -1)
        pi = np.linalg.lstsq(Zf, Xf, rcond=None)[0]
        Xhat = Zf @ pi
        scale = np.linalg.norm(Xf, axis=0)
        sv = np.linalg.svd(Xhat / scale, compute_uv=False)
        rank = int(np.sum(sv > RANK_TOL * sv[0])) if sv[0] > 0 else 0
        cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
        if rank < k or cond > MAX_CONDITION:
            raise IVError(f"first stage is rank deficient or weak (condition number {cond:.3g})", cond)
        xtx = Xhat.T @ Xhat
        coef = np.linalg.solve(xtx, Xhat.T @ Yf)
        score_x = Xhat.reshape(G, T, k)
        bread = np.linalg.inv(xtx)

    U = (Yf - Xf @ coef).reshape(G, T, -1)
    vcov = _cluster_vcov(score_x, U, bread, _n_absorbed(design.region_fe, design.time_fe, T))
    return names, coef, vcov, rank


def fit_design(panel: Panel, design: Design, outcomes) -> dict:
    """Estimate ``design`` for each outcome name; returns ``{outcome: RegressionResult}``."""
    outcomes = list(outcomes)
    Y = np.stack([panel.outcome(o) for o in outcomes], axis=-1)
    names, coef, vcov, rank = _fit(Y, design)
    g = np.asarray(design.weights, dtype=float)
    out = {}
    for j, name in enumerate(outcomes):
        b = coef[:, j]
        v = vcov[j]
        out[name] = RegressionResult(
            names=names,
            coef=b,
            vcov=v,
            ate=float(g @ b),
            ate_se=float(np.sqrt(max(g @ v @ g, 0.0))),
            n_obs=panel.employment.size,
            n_clusters=panel.n_regions,
            first_stage_rank=rank,
        )
    return out


def _regress(y, regressors, region_fe, time_fe, instruments=None):
    y = np.asarray(y, dtype=float)
    design = Design(
        regressors=dict(regressors),
        weights=np.zeros(len(regressors)),
        region_fe=region_fe,
        time_fe=time_fe,
        instruments=None if instruments is None else dict(instruments),
    )
    names, coef, vcov, rank = _fit(y[..., None], design)
    return RegressionResult(
        names=names,
        coef=coef[:, 0],
        vcov=vcov[0],
        ate=float("nan"),
        ate_se=float("nan"),
        n_obs=y.size,
        n_clusters=y.shape[0],
        first_stage_rank=rank,
    )


def ols_fe(y, regressors: dict, region_fe: bool = True, time_fe: bool = True) -> RegressionResult:
    """OLS of ``y`` (R, T) on named (R, T) regressors with absorbed fixed effects."""
    return _regress(y, regressors, region_fe, time_fe)


def tsls(y, endogenous: dict, instruments: dict, region_fe: bool = True, time_fe: bool = True) -> RegressionResult:
    """Two-stage least squares; fixed effects act as included exogenous controls."""
    return _regress(y, endogenous, region_fe, time_fe, instruments=instruments)


# -- design builders ---------------------------------------------------------


def effective_mw(panel: Panel, deflator: float = 0.5) -> np.ndarray:
    return panel.mw - panel.quantile(deflator)


def build_effective_mw(
    panel: Panel,
    region_fe: bool = True,
    time_fe: bool = True,
    deflator: float = 0.5,
    iv: str = "none",
    ams_median: str = "average",
) -> Design:
    x = effective_mw(panel, deflator)
    dx = x[:, 1] - x[:, 0]
    dx2 = x[:, 1] ** 2 - x[:, 0] ** 2
    instruments = None
    if iv in ("two", "ams3"):
        instruments = {"mw": panel.mw, "mw_sq": panel.mw**2}
        if iv == "ams3":
            med = panel.quantile(0.5)
            if ams_median == "average":
                ref = med.mean(axis=1, keepdims=True)
            elif ams_median == "initial":
                ref = med[:, :1]
            else:
                raise ValueError(f"unknown AMS median window {ams_median!r}")
            instruments["mw_x_median"] = panel.mw * ref
    elif iv != "none":
        raise ValueError(f"unknown iv option {iv!r}")
    return Design(
        regressors={"effmw": x, "effmw_sq": x**2},
        weights=np.array([dx.mean(), dx2.mean()]),
        region_fe=region_fe,
        time_fe=time_fe,
        instruments=instruments,
    )


def _intensity(panel: Panel, which: str) -> np.ndarray:
    if which.lower() == "fa":
        return panel.fa
    if which.lower() == "gap":
        return panel.gap
    raise ValueError(f"unknown intensity {which!r}")


def build_intensity(panel: Panel, intensity: str = "fa") -> Design:
    x = _intensity(panel, intensity)
    return Design(regressors={f"{intensity.lower()}_post": x[:, None] * panel.post()}, weights=np.array([x.mean()]))


def binary_treatment(panel: Panel, treated_share: float) -> np.ndarray:
    """Indicator for the ``round(share * R)`` regions with the lowest initial medians.

    Ties are broken by region id ascending.
    """
    if not 0.0 < treated_share < 1.0:
        raise ValueError("treated_share must lie in (0, 1)")
    med0 = panel.quantile(0.5)[:, 0]
    n = int(round(treated_share * med0.size))
    order = np.lexsort((np.arange(med0.size), med0))
    treated = np.zeros(med0.size)
    treated[order[:n]] = 1.0
    return treated


def build_binary(panel: Panel, treated_share: float = 0.5) -> Design:
    d = binary_treatment(panel, treated_share)
    return Design(regressors={"treated_post": d[:, None] * panel.post()}, weights=np.array([d.mean()]))


def build_quadratic(panel: Panel, intensity: str = "fa") -> Design:
    x = _intensity(panel, intensity)
    post = panel.post()
    return Design(
        regressors={"x_post": x[:, None] * post, "x_sq_post": (x**2)[:, None] * post},
        weights=np.array([x.mean(), (x**2).mean()]),
    )


def build_cross_iv(panel: Panel, direction: str = "FA-by-Gap") -> Design:
    if direction == "FA-by-Gap":
        endog, inst = panel.fa, panel.gap
    elif direction == "Gap-by-FA":
        endog, inst = panel.gap, panel.fa
    else:
        raise ValueError(f"unknown cross-IV direction {direction!r}")
    post = panel.post()
    return Design(
        regressors={"x_post": endog[:, None] * post},
        weights=np.array([endog.mean()]),
        instruments={"z_post": inst[:, None] * post},
    )


BUILDERS = {
    "effective_mw": build_effective_mw,
    "fa": lambda panel, **kw: build_intensity(panel, "fa", **kw),
    "gap": lambda panel, **kw: build_intensity(panel, "gap", **kw),
    "binary": build_binary,
    "quadratic": build_quadratic,
    "cross_iv": build_cross_iv,
}


def estimate(panel: Panel, design: str, outcomes, **options) -> dict:
    """Build the named design with ``options`` and fit it to every outcome."""
    try:
        builder = BUILDERS[design]
    except KeyError:
        raise ValueError(f"unknown design {design!r}; expected one of {sorted(BUILDERS)}") from None
    return fit_design(panel, builder(panel, **options), outcomes)


def effective_mw_design(panel, outcome, region_fe=True, time_fe=True, deflator=0.5, iv="none") -> RegressionResult:
    return estimate(panel, "effective_mw", [outcome], region_fe=region_fe, time_fe=time_fe, deflator=deflator, iv=iv)[outcome]


def fa_design(panel, outcome) -> RegressionResult:
    return estimate(panel, "fa", [outcome])[outcome]


def gap_design(panel, outcome) -> RegressionResult:
    return estimate(panel, "gap", [outcome])[outcome]


def binary_design(panel, outcome, treated_share=0.5) -> RegressionResult:
    return estimate(panel, "binary", [outcome], treated_share=treated_share)[outcome]


def quadratic_design(panel, outcome, intensity="fa") -> RegressionResult:
    return estimate(panel, "quadratic", [outcome], intensity=intensity)[outcome]


def cross_iv_design(panel, outcome, direction="FA-by-Gap") -> RegressionResult:
    return estimate(panel, "cross_iv", [outcome], direction=direction)[outcome]
