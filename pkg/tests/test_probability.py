import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwlab.dgp_normal_markdown import MarkdownPolicy, simulate_region
from mwlab.probability import (
    MixedWageDistribution,
    TriangularSegment,
    TruncatedNormalSegment,
    fraction_below,
    gap_numerator,
    mean_level,
    mixed_cdf,
    mixed_quantile,
    normal_cdf,
    normal_quantile,
)
from oracles import MarkdownOracle, phi_cdf

BASE = dict(mu=0.0, sigma=0.542, m=0.7, mw=-1.0)


def baseline():
    return simulate_region(0.0, 0.542, MarkdownPolicy(mw=-1.0, markdown=0.7))


def untruncated(mu, sd):
    return MixedWageDistribution(
        spike_point=mu - 40 * sd,
        spike_mass=0.0,
        segments=(TruncatedNormalSegment(mean=mu, sd=sd, lower=mu - 40 * sd, mass=1.0),),
        employment=1.0,
    )


def spike_only(point):
    return MixedWageDistribution(spike_point=point, spike_mass=0.8, segments=(), employment=0.8)


# -- normal kernels ---------------------------------------------------------


def test_normal_cdf_at_zero():
    assert normal_cdf(0.0) == 0.5


def test_normal_cdf_matches_erf_series_at_minus_one():
    assert abs(normal_cdf(-1.0) - phi_cdf(-1.0)) <= 1e-14
    assert normal_cdf(-1.0) == pytest.approx(0.1586553, abs=5e-8)


@pytest.mark.parametrize("z", [0.3, 1.7, 4.2])
def test_normal_cdf_symmetry(z):
    assert normal_cdf(z) + normal_cdf(-z) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(-8.0, 8.0))
def test_normal_cdf_against_series_oracle(z):
    assert abs(normal_cdf(z) - phi_cdf(z)) <= 1e-14


def test_normal_cdf_saturates():
    assert normal_cdf(-50.0) == 0.0
    assert normal_cdf(50.0) == 1.0


def test_normal_quantile_examples():
    assert normal_quantile(0.5) == 0.0
    # The 7-digit literal 0.1586553 sits 1.9e-7 away in z; invert the exact value instead.
    assert normal_quantile(phi_cdf(-1.0)) == pytest.approx(-1.0, abs=1e-9)
    assert normal_quantile(0.1586553) == pytest.approx(-1.0, abs=1e-6)


def test_normal_quantile_round_trip():
    q = np.linspace(0.01, 0.99, 99)
    assert np.max(np.abs(normal_cdf(normal_quantile(q)) - q)) <= 1e-12
    z = np.linspace(-3, 3, 61)
    assert np.max(np.abs(normal_quantile(normal_cdf(z)) - z)) <= 1e-10


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.5, float("nan")])
def test_normal_quantile_domain(q):
    with pytest.raises(ValueError):
        normal_quantile(q)


# -- mixed distribution kernels -----------------------------------------------


def test_cdf_below_spike_is_zero():
    d = baseline()
    assert mixed_cdf(d, -1.01) == 0.0


def test_cdf_at_minimum_wage():
    z_mw = -1.0 / 0.542
    z_cut = (-1.0 + math.log(0.7)) / 0.542
    expected = (phi_cdf(z_mw) - phi_cdf(z_cut)) / (1 - phi_cdf(z_cut))
    assert mixed_cdf(baseline(), -1.0) == pytest.approx(expected, abs=1e-13)
    assert mixed_cdf(baseline(), -1.0) == pytest.approx(0.02657, abs=1e-4)


def test_cdf_tends_to_one():
    assert mixed_cdf(baseline(), 20.0) == pytest.approx(1.0, abs=1e-15)


def test_quantile_inside_spike_returns_spike_point():
    d = baseline()
    share = float(d.spike_share())
    assert mixed_quantile(d, share * 0.5) == -1.0
    assert mixed_quantile(d, share) == -1.0


@pytest.mark.parametrize("q", [0.05, 0.25, 0.5, 0.9])
def test_quantile_without_binding_minimum(q):
    d = untruncated(0.3, 0.6)
    assert mixed_quantile(d, q) == pytest.approx(0.3 + 0.6 * normal_quantile(q), abs=1e-11)


def test_quantile_matches_quadrature_inversion():
    oracle = MarkdownOracle(**BASE)
    assert mixed_quantile(baseline(), 0.5) == pytest.approx(oracle.quantile(0.5), abs=1e-8)


def test_mean_level_examples():
    assert mean_level(spike_only(-0.4)) == pytest.approx(math.exp(-0.4), rel=1e-15)
    assert mean_level(untruncated(0.0, 0.5)) == pytest.approx(math.exp(0.125), rel=1e-12)
    assert mean_level(untruncated(0.0, 0.5)) == pytest.approx(1.13315, abs=1e-5)
    assert mean_level(baseline()) == pytest.approx(MarkdownOracle(**BASE).mean_level(), rel=1e-9)


def test_gap_numerator_examples():
    d = baseline()
    assert gap_numerator(d, -1.0) == 0.0
    assert gap_numerator(d, -1.3) == 0.0
    c = -0.99
    assert gap_numerator(spike_only(-1.0), c) == pytest.approx(math.exp(c) - math.exp(-1.0), rel=1e-13)
    assert gap_numerator(d, -0.8) == pytest.approx(MarkdownOracle(**BASE).gap_numerator(-0.8), rel=1e-9)


def test_fraction_below_examples():
    d = baseline()
    assert fraction_below(d, -1.2) == 0.0
    assert fraction_below(d, -1.0) == 0.0
    assert fraction_below(d, -1.0 + 1e-12) == pytest.approx(float(d.spike_share()), abs=1e-10)
    assert fraction_below(d, -0.8) == pytest.approx(MarkdownOracle(**BASE).fraction_below(-0.8), abs=1e-10)


def test_triangular_segment_closed_forms():
    seg = TriangularSegment(start=-1.0, base=0.3, mass=0.02)
    assert seg.mass_below(-0.7) == pytest.approx(0.02, rel=1e-15)
    assert seg.mass_below(-1.2) == 0.0
    from scipy import integrate

    dens = lambda w: 0.02 * 2 / 0.3 * (1 - (w + 1.0) / 0.3)
    for x in (-0.95, -0.8, -0.7):
        m, _ = integrate.quad(dens, -1.0, x, epsabs=0, epsrel=1e-13)
        lv, _ = integrate.quad(lambda w: math.exp(w) * dens(w), -1.0, x, epsabs=0, epsrel=1e-13)
        assert seg.mass_below(x) == pytest.approx(m, rel=1e-12)
        assert seg.level_below(x) == pytest.approx(lv, rel=1e-12)


def test_triangular_base_must_be_positive():
    with pytest.raises(ValueError):
        TriangularSegment(start=0.0, base=0.0, mass=0.1)


# -- properties -----------------------------------------------------------


def random_batch(rng, n):
    mu = rng.normal(0, 0.3, n)
    sigma = rng.uniform(0.2, 0.9, n)
    mw = mu + rng.uniform(-2.5, 0.3, n)
    m = rng.uniform(0.5, 1.0, n)
    return mu, sigma, m, mw


def test_galois_connection_on_random_distributions():
    rng = np.random.default_rng(1)
    n = 1000
    mu, sigma, m, mw = random_batch(rng, n)
    half = n // 2
    d_plain = simulate_region(mu[:half], sigma[:half], MarkdownPolicy(mw=mw[:half], markdown=0.7))
    d_tri = simulate_region(
        mu[half:], sigma[half:], MarkdownPolicy(mw=mw[half:], markdown=0.7, pos_height=0.5, pos_base=0.25, employment_cap=None)
    )
    for d, sl in ((d_plain, slice(0, half)), (d_tri, slice(half, n))):
        q = rng.uniform(0.001, 0.999, (5, sl.stop - sl.start))
        w = rng.uniform(mw[sl], mu[sl] + 3 * sigma[sl], (5, sl.stop - sl.start))
        xq = mixed_quantile(d, q)
        assert np.all(mixed_cdf(d, xq) >= q)
        cont = q > d.spike_share()
        assert np.max(np.abs(mixed_cdf(d, xq) - q)[cont]) <= 1e-11
        raw = mixed_cdf(d, w)
        inside = (raw > 0) & (raw < 1)
        p = np.where(inside, raw, 0.5)
        # The default solver stops at a 1e-12 bracket. At float resolution the
        # computed CDF is only monotone up to rounding, hence the slack.
        assert np.all((mixed_quantile(d, p) <= w + 1e-12)[inside])
        slack = 8 * np.finfo(float).eps * np.maximum(1.0, np.abs(w))
        assert np.all((mixed_quantile(d, p, xtol=0.0) <= w + slack)[inside])


def test_cdf_monotone_and_range():
    d = simulate_region(0.1, 0.5, MarkdownPolicy(mw=-0.6, markdown=0.7, pos_height=1.0, pos_base=0.25, employment_cap=None))
    w = np.linspace(-0.6, 6, 2000)
    c = mixed_cdf(d, w)
    assert np.all(np.diff(c) >= 0)
    assert c[0] == pytest.approx(float(d.spike_share()), abs=1e-15)
    assert c[-1] < 1.0 + 1e-15


def test_moments_match_quadrature_on_random_draws():
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(100):
        mu, sigma = rng.normal(0, 0.3), rng.uniform(0.25, 0.8)
        mw = mu + rng.uniform(-2.2, 0.2)
        m = rng.uniform(0.55, 1.0)
        tri = i % 2 == 1
        kw = dict(pos_height=rng.uniform(0.2, 1.5), pos_base=rng.uniform(0.1, 0.4)) if tri else {}
        d = simulate_region(mu, sigma, MarkdownPolicy(mw=mw, markdown=m, employment_cap=None, **kw))
        o = MarkdownOracle(mu, sigma, m, mw, kw.get("pos_height", 0.0), kw.get("pos_base"))
        c = mw + rng.uniform(0.01, 0.5)
        pairs = [
            (mean_level(d), o.mean_level()),
            (gap_numerator(d, c), o.gap_numerator(c)),
            (fraction_below(d, c), o.fraction_below(c)),
        ]
        for got, want in pairs:
            worst = max(worst, abs(float(got) - want) / abs(want))
    assert worst <= 1e-8


@given(
    st.floats(-1.0, 1.0),
    st.floats(0.2, 1.0),
    st.floats(0.4, 1.0),
    st.floats(-3.0, 0.5),
    st.sampled_from([0.0, 0.3, 1.2]),
)
def test_mass_conservation(mu, sigma, m, gap, height):
    policy = MarkdownPolicy(mw=mu + gap, markdown=m, pos_height=height, pos_base=0.2 if height else None, employment_cap=None)
    d = simulate_region(mu, sigma, policy)
    total = d.spike_mass + sum(seg.mass for seg in d.segments)
    assert abs(total - d.employment) <= 1e-12
    d.validate(max_employment=2.0)


@given(st.floats(-1.0, 1.0), st.floats(0.2, 1.0), st.floats(-3.0, 0.5))
def test_no_markdown_means_no_spike(mu, sigma, gap):
    d = simulate_region(mu, sigma, MarkdownPolicy(mw=mu + gap, markdown=1.0))
    assert d.spike_mass == 0.0
    assert d.employment == pytest.approx(1 - phi_cdf(gap / sigma), abs=1e-14)
    w = mu + gap + 0.4
    expected = (phi_cdf((w - mu) / sigma) - phi_cdf(gap / sigma)) / (1 - phi_cdf(gap / sigma))
    assert mixed_cdf(d, w) == pytest.approx(expected, abs=1e-12)


def test_validate_rejects_bad_accounting():
    seg = TruncatedNormalSegment(mean=0.0, sd=0.5, lower=-1.0, mass=0.5)
    with pytest.raises(ValueError):
        MixedWageDistribution(spike_point=-1.0, spike_mass=0.1, segments=(seg,), employment=0.9).validate()
    with pytest.raises(ValueError):
        MixedWageDistribution(spike_point=-0.5, spike_mass=0.1, segments=(seg,), employment=0.6).validate()
