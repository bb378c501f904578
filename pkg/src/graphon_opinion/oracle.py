"""Analytic reference states used to check the simulator.

* the Beta-shaped steady state of the uncontrolled model on separable
  graphons, ``(1 + w)^((1 + mu/rho)/lam - 1) (1 - w)^((1 - mu/rho)/lam - 1)``
  with ``lam = sigma^2 / gamma``;
* the exponents of the controlled quasi-equilibrium
  ``C (1 - w)^alpha_minus (1 + w)^alpha_plus``;
* the uniform target and the exponential moment envelopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError

__all__ = [
    "QuasiEquilibrium",
    "beta_equilibrium",
    "quasi_equilibrium_exponents",
    "controlled_exponents",
    "uniform_target",
    "UniformTarget",
    "ConsensusRate",
    "DeclusterRate",
    "variance_decay_bound",
    "spatial_profile",
]


@dataclass(frozen=True)
class QuasiEquilibrium:
    """Normalised density ``C (1 - w)^alpha_minus (1 + w)^alpha_plus`` on
    ``(-1, 1)``.

    ``normalization`` is ``C``; ``lam`` and ``mean_ratio`` are recorded when
    the state comes from :func:`beta_equilibrium`.
    """

    alpha_minus: float
    alpha_plus: float
    normalization: float
    lam: float | None = None
    mean_ratio: float | None = None
    x: float | None = None

    @classmethod
    def from_exponents(cls, alpha_minus, alpha_plus, **meta):
        if not (alpha_minus > -1.0 and alpha_plus > -1.0):
            raise DomainError("exponents must exceed -1 for an integrable density")
        a, b = alpha_minus + 1.0, alpha_plus + 1.0
        # int (1-w)^(a-1) (1+w)^(b-1) dw = 2^(a+b-1) B(a, b)
        log_mass = (a + b - 1.0) * math.log(2.0) + special.betaln(a, b)
        return cls(float(alpha_minus), float(alpha_plus), math.exp(-log_mass), **meta)

    def density(self, w):
        w = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.normalization * np.power(1.0 - w, self.alpha_minus) * np.power(
                1.0 + w, self.alpha_plus
            )
        out = np.where(np.abs(w) <= 1.0, out, 0.0)
        return float(out) if out.ndim == 0 else out

    __call__ = density

    def cdf(self, w):
        """Closed form via the regularised incomplete beta function."""
        w = np.clip(np.asarray(w, dtype=float), -1.0, 1.0)
        out = special.betainc(self.alpha_plus + 1.0, self.alpha_minus + 1.0, 0.5 * (1.0 + w))
        return float(out) if out.ndim == 0 else out

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        out = 2.0 * special.betaincinv(self.alpha_plus + 1.0, self.alpha_minus + 1.0, q) - 1.0
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, size):
        return 2.0 * rng.beta(self.alpha_plus + 1.0, self.alpha_minus + 1.0, size) - 1.0

    def _quad(self, g=None, lo=-1.0, hi=1.0):
        """``int_lo^hi g(w) density(w) dw`` by adaptive quadrature.

        The range is split at 0 and a half touching a pole carries the
        factor ``(1 -/+ w)^alpha`` as an algebraic weight, so the integrand
        passed to QUADPACK stays smooth even for exponents in (-1, 0).
        """
        g = (lambda w: 1.0) if g is None else g
        am, ap, c = self.alpha_minus, self.alpha_plus, self.normalization
        opts = dict(epsabs=1e-14, epsrel=1e-12, limit=500, full_output=1)
        total = 0.0
        a, b = lo, min(hi, 0.0)
        if b > a:
            if a == -1.0:
                out = integrate.quad(lambda w: g(w) * c * (1.0 - w) ** am, a, b,
                                     weight="alg", wvar=(ap, 0.0), **opts)
            else:
                out = integrate.quad(lambda w: g(w) * self.density(w), a, b, **opts)
            total += _checked(out)
        a, b = max(lo, 0.0), hi
        if b > a:
            if b == 1.0:
                out = integrate.quad(lambda w: g(w) * c * (1.0 + w) ** ap, a, b,
                                     weight="alg", wvar=(0.0, am), **opts)
            else:
                out = integrate.quad(lambda w: g(w) * self.density(w), a, b, **opts)
            total += _checked(out)
        return total

    def cdf_quad(self, w):
        """CDF by adaptive quadrature of the density (independent route)."""
        return self._quad(None, -1.0, float(np.clip(w, -1.0, 1.0)))

    def mass(self):
        return self._quad()

    def moment_quad(self, k):
        return self._quad(lambda w: w**k)

    @property
    def mean(self):
        a, b = self.alpha_minus, self.alpha_plus
        return (b - a) / (a + b + 2.0)

    @property
    def variance(self):
        # u = (1 + w)/2 ~ Beta(b + 1, a + 1)
        p, q = self.alpha_plus + 1.0, self.alpha_minus + 1.0
        return 4.0 * p * q / ((p + q) ** 2 * (p + q + 1.0))

    @property
    def entropy(self):
        p, q = self.alpha_plus + 1.0, self.alpha_minus + 1.0
        h01 = (
            special.betaln(p, q)
            - (p - 1.0) * special.digamma(p)
            - (q - 1.0) * special.digamma(q)
            + (p + q - 2.0) * special.digamma(p + q)
        )
        return float(h01 + math.log(2.0))


def _checked(out):
    # with full_output, QUADPACK appends a message only on failure
    if len(out) > 3:
        raise QuadratureError(out[3])
    return out[0]


def beta_equilibrium(lam, mean_ratio):
    """Steady opinion law of the uncontrolled model, ``lam = sigma^2/gamma``.

    Exponents are ``(1 -/+ mean_ratio)/lam - 1`` on ``(1 - w)`` and
    ``(1 + w)``; the mean equals ``mean_ratio``.
    """
    if not lam > 0.0:
        raise DomainError("lam must be positive")
    if not abs(mean_ratio) < 1.0:
        raise DomainError("|mean_ratio| must be below 1")
    a_minus = (1.0 - mean_ratio) / lam - 1.0
    a_plus = (1.0 + mean_ratio) / lam - 1.0
    if not (a_minus > -1.0 and a_plus > -1.0):
        raise DomainError("non-integrable exponents")
    if not (math.isfinite(a_minus) and math.isfinite(a_plus)):
        raise DomainError("exponents overflow; lam too small")
    return QuasiEquilibrium.from_exponents(a_minus, a_plus, lam=float(lam), mean_ratio=float(mean_ratio))


def quasi_equilibrium_exponents(rho_P, mu_P, d, m, theta, gamma, sigma2, kappa):
    """``(alpha_minus, alpha_plus)`` of the controlled quasi-equilibrium.

    ``mu_P`` is the normalised first moment, so the momentum entering the
    exponents is ``rho_P * mu_P``::

        alpha_-/+ = gamma [kappa (1-theta)(rho_P -/+ rho_P mu_P)
                           - gamma theta d (1 -/+ m)]
                    / (kappa rho_P (1-theta) sigma2) - 1
    """
    rho_P = np.asarray(rho_P, dtype=float)
    if np.any(~(rho_P > 0.0)):
        raise DomainError("rho_P must be positive")
    if not kappa_positive(kappa):
        raise DomainError("kappa must be positive")
    if not 0.0 <= theta < 1.0:
        raise DomainError("theta must lie in [0, 1)")
    if not sigma2 > 0.0:
        raise DomainError("sigma2 must be positive")
    kappa = np.asarray(kappa, dtype=float)
    mom = rho_P * np.asarray(mu_P, dtype=float)
    den = kappa * rho_P * (1.0 - theta) * sigma2
    ctrl = gamma * theta * np.asarray(d, dtype=float)
    a_minus = gamma * (kappa * (1.0 - theta) * (rho_P - mom) - ctrl * (1.0 - m)) / den - 1.0
    a_plus = gamma * (kappa * (1.0 - theta) * (rho_P + mom) - ctrl * (1.0 + m)) / den - 1.0
    if a_minus.ndim == 0:
        return float(a_minus), float(a_plus)
    return a_minus, a_plus


def kappa_positive(kappa):
    return bool(np.all(np.asarray(kappa, dtype=float) > 0.0))


def controlled_exponents(x, d, stats, m, theta, gamma, sigma2, kappa):
    """Exponents at label(s) ``x`` using ``stats`` (nearest grid point)."""
    idx = stats.nearest(np.asarray(x, dtype=float))
    return quasi_equilibrium_exponents(
        stats.rho_P[idx], stats.mu_P[idx], d, m, theta, gamma, sigma2, kappa
    )


@dataclass(frozen=True)
class UniformTarget:
    variance: float = 1.0 / 3.0
    entropy_w: float = math.log(2.0)
    entropy_xw: float = math.log(2.0)
    density: float = 0.5

    def cdf(self, w):
        return np.clip((np.asarray(w, dtype=float) + 1.0) / 2.0, 0.0, 1.0)


def uniform_target():
    """Statistics of the uniform law on ``[0, 1] x [-1, 1]``."""
    return UniformTarget()


@dataclass(frozen=True)
class ConsensusRate:
    """Uncontrolled contraction ``dE/dt <= -2 gamma (1-gamma) |B|_inf (E - m^2)``."""

    gamma: float
    b_sup: float = 1.0

    @property
    def rate(self):
        return 2.0 * self.gamma * (1.0 - self.gamma) * self.b_sup

    def limit(self, m):
        return m * m


@dataclass(frozen=True)
class DeclusterRate:
    """Controlled relaxation toward 1/3 at rate ``3 |P| |B| (1-theta) sigma2``."""

    theta: float
    sigma2: float
    b_sup: float = 1.0
    p_sup: float = 1.0

    @property
    def rate(self):
        return 3.0 * self.p_sup * self.b_sup * (1.0 - self.theta) * self.sigma2

    def limit(self, m):
        return 1.0 / 3.0


def variance_decay_bound(t, e0, m, rate):
    """Exponential envelope ``L + (E0 - L) exp(-r t)`` of the second moment.

    ``rate`` is a :class:`ConsensusRate` (limit ``m^2``) or a
    :class:`DeclusterRate` (limit 1/3).
    """
    if not rate.rate > 0.0:
        raise DomainError("rate parameters must be positive")
    lim = rate.limit(m)
    out = lim + (e0 - lim) * np.exp(-rate.rate * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def spatial_profile(graphon, x):
    """Label factor ``B1(x) / (d(x) C_B)`` of the separable steady state.

    ``C_B`` normalises the profile to unit mass on [0, 1].
    """
    fac = graphon.factors()
    if fac is None:
        raise DomainError("spatial profile needs a separable graphon")
    b1 = fac[0]

    def raw(v):
        return float(b1(np.array(v)) / graphon.in_degree(v))

    out = integrate.quad(raw, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10, limit=200, full_output=1)
    if len(out) > 3:
        raise QuadratureError(out[3])
    cb = out[0]
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        prof = np.asarray(b1(x), dtype=float) / np.asarray(graphon.in_degree(x)) / cb
    return float(prof) if prof.ndim == 0 else prof
