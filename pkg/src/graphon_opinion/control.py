"""Penalty calibration for the declustering control.

The quasi-equilibrium of the controlled mean-field model is uniform when the
penalty is ``kappa(x) = gamma^2 theta d(x) / (rho_P(x) (1 - theta)(gamma -
sigma^2))``, where ``rho_P`` is the graphon-weighted mass seen by label
``x``.  For separable kernels with unit compromise this collapses to a
single constant.  The weighted statistics are Monte Carlo sums over the
ensemble evaluated on a fixed label grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "WeightedStats",
    "LabelStatsCache",
    "GeneralPenalty",
    "label_grid",
    "weighted_stats",
    "kappa_separable",
    "kappa_general",
    "SIDE_CONDITION_TOL",
    "UNDEFINED_MASS",
]

UNDEFINED_MASS = 1e-12
SIDE_CONDITION_TOL = 0.05
STATS_GRID = 64


def label_grid(n=STATS_GRID):
    """Cell midpoints of a uniform partition of [0, 1]."""
    return (np.arange(n) + 0.5) / n


@dataclass(frozen=True)
class WeightedStats:
    """Graphon-weighted ensemble moments on a label grid.

    ``rho_P[k]`` is the weighted mass and ``mu_P[k]`` the normalised first
    moment seen by label ``x_grid[k]`` (NaN where the mass is below
    ``UNDEFINED_MASS``).  ``rho`` and ``mu`` are the scalar weighted mass
    and momentum of a separable kernel, ``None`` otherwise; ``m`` is the
    plain ensemble mean.
    """

    x_grid: np.ndarray
    rho_P: np.ndarray
    mu_P: np.ndarray
    m: float
    rho: float | None = None
    mu: float | None = None

    @property
    def undefined(self):
        return ~(self.rho_P >= UNDEFINED_MASS)

    def nearest(self, x):
        """Index of the grid point closest to each label."""
        g = self.x_grid
        idx = np.clip(np.searchsorted(g, x), 1, g.size - 1)
        left = g[idx - 1]
        return np.where(np.abs(np.asarray(x) - left) <= np.abs(g[idx] - np.asarray(x)), idx - 1, idx)

    @property
    def mean_ratio(self):
        if self.rho is None:
            return None
        return self.mu / self.rho


class LabelStatsCache:
    """Precomputed ``B(x_k, x_j) P(x_k, x_j)`` for a fixed set of labels.

    Labels never change during a run, so only the opinion-weighted sums need
    recomputing; ``rho_P`` is fixed.
    """

    def __init__(self, labels, graphon, P=None, x_grid=None):
        self.labels = np.asarray(labels, dtype=float)
        if self.labels.size == 0:
            raise DomainError("weighted statistics need a nonempty ensemble")
        self.x_grid = label_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            weights = graphon(self.x_grid[:, None], self.labels[None, :])
            if P is not None and not getattr(P, "is_unit", False):
                weights = weights * P(self.x_grid[:, None], self.labels[None, :])
        if np.any(~np.isfinite(weights)):
            raise DomainError("graphon is unbounded at the ensemble labels; truncate it first")
        self.weights = np.ascontiguousarray(weights)
        n = self.labels.size
        self.rho_P = self.weights.sum(axis=1) / n
        self.b2 = None
        fac = graphon.factors()
        if fac is not None and (P is None or getattr(P, "is_unit", False)):
            with np.errstate(divide="ignore"):
                self.b2 = np.asarray(fac[1](self.labels), dtype=float)
            if np.any(~np.isfinite(self.b2)):
                self.b2 = None

    def stats(self, opinions):
        w = np.asarray(opinions, dtype=float)
        n = w.size
        defined = self.rho_P >= UNDEFINED_MASS
        with np.errstate(invalid="ignore", divide="ignore"):
            mu_P = np.where(defined, (self.weights @ w) / (n * self.rho_P), np.nan)
        rho = mu = None
        if self.b2 is not None:
            rho = float(self.b2.sum() / n)
            mu = float(self.b2 @ w / n)
        return WeightedStats(self.x_grid, self.rho_P.copy(), mu_P, float(w.mean()), rho, mu)


def weighted_stats(labels, opinions, graphon, P=None, x_grid=None):
    """Estimate ``rho_P`` and ``mu_P`` on ``x_grid`` from an ensemble.

    ``rho_P(x) ~ (1/N) sum_j B(x, x_j) P(x, x_j)`` and ``mu_P(x) ~ (1/(N
    rho_P)) sum_j B(x, x_j) P(x, x_j) w_j``.  The default grid has 64 cell
    midpoints.
    """
    return LabelStatsCache(labels, graphon, P, x_grid).stats(opinions)


def _check_regime(theta, gamma, sigma2):
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    if not gamma > sigma2:
        raise DomainError(
            "diffusion too strong for uniform quasi-equilibrium (need gamma > sigma2)"
        )


def kappa_separable(theta, gamma, sigma2):
    """Scalar penalty ``gamma^2 theta / ((1 - theta)(gamma - sigma2))``."""
    _check_regime(theta, gamma, sigma2)
    return gamma * gamma * theta / ((1.0 - theta) * (gamma - sigma2))


class GeneralPenalty(NamedTuple):
    kappa: np.ndarray
    mean_ok: bool
    mu_ok: np.ndarray


def kappa_general(x, stats, graphon, theta, gamma, sigma2, degree=None, tol=SIDE_CONDITION_TOL):
    """Per-label penalty from the current weighted statistics.

    ``rho_P`` is read at the grid point nearest to each label.  ``degree``
    may supply precomputed in-degrees ``d(x)``; otherwise they come from
    ``graphon``.  Also reports whether the side conditions ``m = 0`` and
    ``mu_P(x) = 0`` hold within ``tol``; the formula is only optimal when
    they do.
    """
    _check_regime(theta, gamma, sigma2)
    x = np.asarray(x, dtype=float)
    idx = stats.nearest(x)
    rho = stats.rho_P[idx]
    if np.any(~(rho > 0.0)):
        raise DomainError("weighted mass rho_P must be positive")
    d = np.asarray(graphon.in_degree(x) if degree is None else degree, dtype=float)
    kappa = gamma * gamma * theta * d / (rho * (1.0 - theta) * (gamma - sigma2))
    mu = stats.mu_P[idx]
    return GeneralPenalty(kappa, bool(abs(stats.m) <= tol), np.abs(mu) <= tol)
