"""Independent reference computations used only by the tests.

Nothing here reuses the package's closed forms: the normal CDF comes from a
high-precision erf Maclaurin series, and every moment of a wage distribution
is integrated numerically from the raw model primitives.
"""

import math

import mpmath
from scipy import integrate, optimize

mpmath.mp.dps = 100


def erf_series(x, min_terms=30):
    """erf(x) from its Maclaurin series, summed in 100-digit arithmetic (the alternating terms cancel about z**2/4.6 digits)."""
    x = mpmath.mpf(x)
    total = mpmath.mpf(0)
    term = x
    n = 0
    while True:
        piece = term / (2 * n + 1)
        total += piece
        n += 1
        term *= -x * x / n
        if n >= min_terms and abs(piece) < mpmath.mpf(10) ** -60:
            break
    return 2 / mpmath.sqrt(mpmath.pi) * total


def phi_cdf(z):
    """Standard normal CDF via the erf series (exact to well below 1e-15 for |z| <= 20)."""
    return float((1 + erf_series(mpmath.mpf(z) / mpmath.sqrt(2))) / 2)


def phi_pdf(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


class MarkdownOracle:
    """Observed law of the Normal-markdown model built from (mu, sigma, m, mw, P_h, P_b)."""

    def __init__(self, mu, sigma, m, mw, pos_height=0.0, pos_base=None):
        self.mu, self.sigma, self.m, self.mw = mu, sigma, m, mw
        self.h, self.b = pos_height, pos_base
        z_mw = (mw - mu) / sigma
        z_cut = (mw + math.log(m) - mu) / sigma
        self.spike = phi_cdf(z_mw) - phi_cdf(z_cut)
        self.tri_mass = 0.0 if pos_height == 0 else 0.5 * pos_base * pos_height * phi_pdf(z_mw) / sigma
        self.emp = 1 - phi_cdf(z_cut) + self.tri_mass
        self.top = mu + 14 * sigma

    def density(self, w):
        """Unconditional continuous density above mw."""
        if w < self.mw:
            return 0.0
        f = phi_pdf((w - self.mu) / self.sigma) / self.sigma
        if self.h > 0 and w <= self.mw + self.b:
            f += self.tri_mass * 2 / self.b * (1 - (w - self.mw) / self.b)
        return f

    def _integrate(self, g, upper):
        pts = [self.mw + self.b] if self.h > 0 and self.mw + self.b < upper else None
        val, _ = integrate.quad(lambda w: g(w) * self.density(w), self.mw, upper, points=pts, epsabs=0, epsrel=1e-13, limit=400)
        return val

    def cdf(self, w):
        if w < self.mw:
            return 0.0
        return (self.spike + self._integrate(lambda x: 1.0, min(w, self.top))) / self.emp

    def fraction_below(self, c):
        if c <= self.mw:
            return 0.0
        return (self.spike + self._integrate(lambda x: 1.0, c)) / self.emp

    def mean_level(self):
        return (self.spike * math.exp(self.mw) + self._integrate(math.exp, self.top)) / self.emp

    def gap_numerator(self, c):
        if c <= self.mw:
            return 0.0
        cont = self._integrate(lambda x: math.exp(c) - math.exp(x), c)
        return (self.spike * (math.exp(c) - math.exp(self.mw)) + cont) / self.emp

    def quantile(self, q):
        if self.spike / self.emp >= q:
            return self.mw
        return optimize.brentq(lambda w: self.cdf(w) - q, self.mw, self.top, xtol=1e-14, rtol=1e-15)
