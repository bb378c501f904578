"""Elementary opinion updates.

Two agents ``(x, w)`` and ``(y, w*)`` meet and compromise::

    w'  = w  - gamma P(x, y) (w  - w*) + eta  D(w)
    w*' = w* - gamma P(y, x) (w* - w)  + eta~ D(w*)

with ``D(w) = sqrt(1 - w^2)``.  A controlled agent instead moves away from
the population mean ``m`` through the closed-form optimal control, active
only inside the selection interval.  Everything here is a pure function of
its arguments; randomness enters only through explicitly passed noise
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "CompromiseFunction",
    "NoiseModel",
    "ControlParams",
    "diffusion",
    "binary_update",
    "pairwise_mean_shift",
    "admissible_noise_bound",
    "selection_interval",
    "selection",
    "control_gain",
    "controlled_update",
]

DEGREE_GRID = 1024


def diffusion(w):
    """Local diffusion strength ``sqrt(1 - w^2)``; vanishes at the poles."""
    w = np.asarray(w, dtype=float)
    return np.sqrt(np.maximum(0.0, 1.0 - w * w))


class CompromiseFunction:
    """Label-dependent compromise propensity ``P(x, y)`` with values in [0, 1].

    ``kind`` is ``"unit"`` (``P = 1``), ``"degree-ratio-exp"``
    (``exp(-alpha d(x)/d(y))``) or ``"degree-ratio-rational"``
    (``(1 + d(x)/d(y))^-alpha``), where ``d`` is the in-degree of
    ``graphon``.  Degrees are tabulated once at cell midpoints of a
    1024-point grid and linearly interpolated.
    """

    KINDS = ("unit", "degree-ratio-exp", "degree-ratio-rational")

    def __init__(self, kind="unit", alpha=1.0, graphon=None):
        if kind not in self.KINDS:
            raise DomainError(f"unknown compromise kind {kind!r}")
        self.kind = kind
        self.alpha = float(alpha)
        self.graphon = graphon
        self._grid = None
        self._deg = None
        if kind != "unit":
            if not self.alpha > 0.0:
                raise DomainError("degree-ratio compromise needs alpha > 0")
            if graphon is None:
                raise DomainError("degree-ratio compromise needs a graphon")
            self._grid = (np.arange(DEGREE_GRID) + 0.5) / DEGREE_GRID
            self._deg = np.asarray(graphon.in_degree(self._grid), dtype=float)
            if np.any(self._deg <= 0.0) or np.any(~np.isfinite(self._deg)):
                raise DomainError("degree-ratio compromise needs finite positive degrees")

    @property
    def is_unit(self):
        return self.kind == "unit"

    @property
    def symmetric(self):
        return self.kind == "unit"

    def degree(self, x):
        """Interpolated in-degree used by the degree-ratio kinds."""
        return np.interp(np.asarray(x, dtype=float), self._grid, self._deg)

    def from_degrees(self, dx, dy):
        """``P`` given the degrees of the two labels."""
        if self.is_unit:
            return np.ones(np.broadcast(dx, dy).shape)
        ratio = np.asarray(dx) / np.asarray(dy)
        if self.kind == "degree-ratio-exp":
            return np.exp(-self.alpha * ratio)
        return np.power(1.0 + ratio, -self.alpha)

    def __call__(self, x, y):
        if self.is_unit:
            out = np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        else:
            out = self.from_degrees(self.degree(x), self.degree(y))
        return float(out) if np.ndim(out) == 0 else out

    def describe(self):
        if self.is_unit:
            return {"kind": self.kind}
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class NoiseModel:
    """Centered bounded noise of variance ``variance``.

    ``shape="uniform"`` draws from ``[-sqrt(3) s, sqrt(3) s]``,
    ``shape="two-point"`` from ``{-s, +s}``, with ``s = sqrt(variance)``.
    """

    variance: float
    shape: str = "uniform"

    SHAPES = ("uniform", "two-point")

    def __post_init__(self):
        if not self.variance >= 0.0:
            raise DomainError("noise variance must be nonnegative")
        if self.shape not in self.SHAPES:
            raise DomainError(f"unknown noise shape {self.shape!r}")

    @property
    def std(self):
        return math.sqrt(self.variance)

    @property
    def bound(self):
        return math.sqrt(3.0) * self.std if self.shape == "uniform" else self.std

    @property
    def shape_code(self):
        return self.SHAPES.index(self.shape)

    def from_uniform(self, u):
        """Map uniform variates on (0, 1) to noise values."""
        u = np.asarray(u, dtype=float)
        if self.shape == "uniform":
            return self.bound * (2.0 * u - 1.0)
        return np.where(u < 0.5, -self.std, self.std)

    def sample(self, rng, size=None):
        return self.from_uniform(rng.random(size))

    def scaled(self, factor):
        return NoiseModel(self.variance * factor, self.shape)


@dataclass(frozen=True)
class ControlParams:
    """Fraction of controlled interactions and penalty specification.

    ``kappa_mode`` is ``"fixed"`` (use ``kappa``), ``"separable"`` (the
    calibrated scalar penalty) or ``"general"`` (per-label penalty refreshed
    from the ensemble).  ``kappa`` is the unscaled penalty; the regularisation
    weight actually used in an interaction is ``kappa * epsilon``.
    """

    theta: float
    kappa_mode: str = "separable"
    kappa: float | None = None

    MODES = ("fixed", "separable", "general")

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError("theta must lie in [0, 1]")
        if self.kappa_mode not in self.MODES:
            raise DomainError(f"unknown kappa mode {self.kappa_mode!r}")
        if self.kappa_mode == "fixed" and (self.kappa is None or not self.kappa > 0.0):
            raise DomainError("fixed kappa mode needs kappa > 0")
        if self.kappa_mode != "fixed" and self.theta > 0.0 and not self.theta < 1.0:
            raise DomainError("optimal penalty needs 0 < theta < 1")

    @property
    def nu(self):
        """Unscaled penalty of the fixed mode (``None`` otherwise)."""
        return self.kappa if self.kappa_mode == "fixed" else None


def _check_opinion(name, w):
    w = np.asarray(w, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(np.abs(w) > 1.0):
        raise DomainError(f"{name} must lie in [-1, 1]")
    return w


def binary_update(w, w_star, x, y, gamma, P, eta=0.0, eta_tilde=0.0):
    """Post-interaction opinions of a compromise/diffusion encounter.

    Parameters
    ----------
    w, w_star : float or array
        Opinions of the two agents, in [-1, 1].
    x, y : float or array
        Their network labels.
    gamma : float
        Compromise strength, ``0 < gamma <= 1/2``.
    P : CompromiseFunction or callable
        Compromise propensity ``P(x, y)``.
    eta, eta_tilde : float or array
        Noise realisations for each agent.

    Returns
    -------
    (w', w*') clamped to [-1, 1].  Without noise the clamp never binds.
    """
    w = _check_opinion("w", w)
    w_star = _check_opinion("w_star", w_star)
    if not 0.0 < gamma <= 0.5:
        raise DomainError("gamma must lie in (0, 1/2]")
    pxy = np.asarray(P(x, y), dtype=float)
    pyx = np.asarray(P(y, x), dtype=float)
    new = w - gamma * pxy * (w - w_star) + np.asarray(eta) * diffusion(w)
    new_star = w_star - gamma * pyx * (w_star - w) + np.asarray(eta_tilde) * diffusion(w_star)
    new = np.clip(new, -1.0, 1.0)
    new_star = np.clip(new_star, -1.0, 1.0)
    if new.ndim == 0 and new_star.ndim == 0:
        return float(new), float(new_star)
    return new, new_star


def pairwise_mean_shift(w, w_star, x, y, gamma, P):
    """Expected change of ``w + w*`` over the noise in one encounter."""
    return gamma * (P(x, y) - P(y, x)) * (w_star - w)


def admissible_noise_bound(D=diffusion, lo=-1.0, hi=1.0, n=10_000):
    """Grid minimum of ``min((1 - w)/D(w), D(w))`` over ``[lo, hi]``.

    Points where ``D`` vanishes are skipped in the ratio but still count in
    the second term.
    """
    w = np.linspace(lo, hi, n)
    d = np.broadcast_to(np.asarray(D(w), dtype=float), w.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0.0, (1.0 - w) / d, np.inf)
    return max(0.0, float(min(ratio.min(), d.min())))


def selection_interval(m, gamma, nu):
    """Symmetric open interval in which the control acts."""
    hi = (gamma * gamma * (1.0 + m) + nu) / (2.0 * gamma * gamma + nu)
    return -hi, hi


def selection(w, m, gamma, nu):
    """Indicator ``S(w)`` of the selection interval."""
    _, hi = selection_interval(m, gamma, nu)
    return (np.abs(np.asarray(w, dtype=float)) < hi).astype(float)


def control_gain(w, m, gamma, nu):
    """Optimal control ``u* = -gamma S / (nu + gamma^2 S^2) (w - m)``."""
    s = selection(w, m, gamma, nu)
    out = -gamma * s / (nu + gamma * gamma * s * s) * (np.asarray(w) - m)
    return float(out) if np.ndim(out) == 0 else out


def controlled_update(w, m, gamma, nu):
    """Opinion after a controlled interaction: pushed away from ``m``.

    ``w'' = w + gamma^2 S^2 / (gamma^2 S^2 + nu) (w - m)``.  The symmetric
    selection interval keeps the result in [-1, 1] whenever ``m <= 0``; for
    ``m > 0`` the lower end may overshoot by ``O(gamma^2 m / nu)``, so the
    result is clamped.
    """
    w = np.asarray(w, dtype=float)
    s = selection(w, m, gamma, nu)
    g2 = gamma * gamma * s * s
    out = np.clip(w + g2 / (g2 + nu) * (w - m), -1.0, 1.0)
    return float(out) if out.ndim == 0 else out
