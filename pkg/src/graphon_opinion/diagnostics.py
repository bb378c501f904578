"""Ensemble observables: moments, label-binned moments, histograms,
plug-in entropies and the Kolmogorov-Smirnov distance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "DiagnosticsFrame",
    "Histogram",
    "MarginalMoments",
    "marginal_moments",
    "binned_variance",
    "weighted_moment",
    "histogram1d",
    "histogram2d",
    "entropy",
    "ks_distance",
    "FrameBuilder",
    "X_BINS",
    "W_BINS",
]

X_BINS = 64
W_BINS = 64


@dataclass(frozen=True)
class DiagnosticsFrame:
    step: int
    tau: float
    mean: float
    energy: float
    variance: float
    entropy_w: float
    entropy_xw: float
    ks_vs_oracle: float = math.nan
    accepted: int = 0
    clamped: int = 0
    warnings: tuple = field(default=(), compare=False)

    FIELDS = (
        "step", "tau", "mean", "energy", "variance", "entropy_w",
        "entropy_xw", "ks_vs_oracle", "accepted", "clamped",
    )

    def row(self):
        return tuple(getattr(self, name) for name in self.FIELDS)


@dataclass(frozen=True)
class Histogram:
    """Normalised density on a regular grid.

    ``edges`` holds one edge array per axis (opinion axis last).
    """

    density: np.ndarray
    edges: tuple

    @property
    def cell_area(self):
        area = 1.0
        for e in self.edges:
            area *= float(e[1] - e[0])
        return area

    def total(self):
        return float(self.density.sum() * self.cell_area)

    def rows(self):
        """``(x_lo, x_hi, w_lo, w_hi, density)`` tuples of a 2D histogram."""
        if self.density.ndim != 2:
            raise DomainError("rows() needs a 2D histogram")
        xe, we = self.edges
        for i in range(self.density.shape[0]):
            for j in range(self.density.shape[1]):
                yield float(xe[i]), float(xe[i + 1]), float(we[j]), float(we[j + 1]), float(self.density[i, j])


def _check_bins(*bins):
    for b in bins:
        if int(b) < 1:
            raise DomainError("bin counts must be at least 1")


def _x_index(labels, x_bins):
    return np.minimum((np.asarray(labels) * x_bins).astype(np.int64), x_bins - 1)


def _w_index(opinions, w_bins):
    u = (np.asarray(opinions) + 1.0) * (0.5 * w_bins)
    return np.clip(u.astype(np.int64), 0, w_bins - 1)


def histogram1d(opinions, w_bins=W_BINS):
    _check_bins(w_bins)
    w = np.asarray(opinions, dtype=float)
    counts = np.bincount(_w_index(w, w_bins), minlength=w_bins).astype(float)
    width = 2.0 / w_bins
    dens = counts / (max(w.size, 1) * width)
    return Histogram(dens, (np.linspace(-1.0, 1.0, w_bins + 1),))


def histogram2d(labels, opinions, x_bins=X_BINS, w_bins=W_BINS):
    """Joint density of ``(x, w)`` on ``[0, 1] x [-1, 1]``; cell area is
    ``(1/x_bins)(2/w_bins)``."""
    _check_bins(x_bins, w_bins)
    w = np.asarray(opinions, dtype=float)
    flat = _x_index(labels, x_bins) * w_bins + _w_index(w, w_bins)
    counts = np.bincount(flat, minlength=x_bins * w_bins).astype(float)
    area = (1.0 / x_bins) * (2.0 / w_bins)
    dens = counts.reshape(x_bins, w_bins) / (max(w.size, 1) * area)
    return Histogram(
        dens, (np.linspace(0.0, 1.0, x_bins + 1), np.linspace(-1.0, 1.0, w_bins + 1))
    )


def _plugin_entropy(counts, area):
    n = counts.sum()
    if n <= 0:
        return math.nan
    p = counts[counts > 0] / n
    return float(np.sum(p * np.log(area / p)))


def entropy(hist):
    """Plug-in differential entropy ``sum p_k log(area / p_k)`` (nats)."""
    area = hist.cell_area
    mass = np.asarray(hist.density, dtype=float).ravel() * area
    return _plugin_entropy(mass, area)


@dataclass(frozen=True)
class MarginalMoments:
    """Per-label-bin first moment ``Lam`` and second moment ``Xi`` as
    densities in ``x`` together with the bin mass ``Phi``.

    Bin means are ``Lam / (Phi x_bins)``; empty bins hold NaN.
    """

    edges: np.ndarray
    Lam: np.ndarray
    Xi: np.ndarray
    Phi: np.ndarray

    @property
    def bin_mean(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.Lam / (self.Phi * (self.edges.size - 1))

    @property
    def bin_energy(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.Xi / (self.Phi * (self.edges.size - 1))


def marginal_moments(labels, opinions, x_bins=X_BINS):
    _check_bins(x_bins)
    w = np.asarray(opinions, dtype=float)
    n = w.size
    idx = _x_index(labels, x_bins)
    cnt = np.bincount(idx, minlength=x_bins).astype(float)
    # correctly rounded per-bin sums, so one bin reproduces the global moments
    order = np.argsort(idx, kind="stable")
    bounds = np.concatenate(([0], np.cumsum(cnt).astype(np.int64)))
    ws = w[order]
    s1 = np.array([math.fsum(ws[a:b]) for a, b in zip(bounds[:-1], bounds[1:])])
    s2 = np.array([math.fsum(ws[a:b] ** 2) for a, b in zip(bounds[:-1], bounds[1:])])
    empty = cnt == 0
    lam = np.where(empty, np.nan, s1 / n * x_bins)
    xi = np.where(empty, np.nan, s2 / n * x_bins)
    return MarginalMoments(np.linspace(0.0, 1.0, x_bins + 1), lam, xi, cnt / n)


def binned_variance(labels, opinions, x_bins=X_BINS):
    """``(variance, mass)`` per label bin, using a two-pass estimate."""
    _check_bins(x_bins)
    w = np.asarray(opinions, dtype=float)
    idx = _x_index(labels, x_bins)
    cnt = np.bincount(idx, minlength=x_bins).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.bincount(idx, weights=w, minlength=x_bins) / cnt
        dev = w - mean[idx]
        var = np.bincount(idx, weights=dev * dev, minlength=x_bins) / cnt
    return var, cnt / max(w.size, 1)


def weighted_moment(labels, opinions, phi, alpha):
    """``(1/N) sum_i phi(x_i) w_i^alpha`` for ``alpha`` in {0, 1}."""
    if alpha not in (0, 1):
        raise DomainError("alpha must be 0 or 1")
    x = np.asarray(labels, dtype=float)
    w = np.asarray(opinions, dtype=float)
    weights = np.broadcast_to(np.asarray(phi(x), dtype=float), x.shape)
    terms = weights if alpha == 0 else weights * w
    return math.fsum(terms) / x.size


def ks_distance(opinions, cdf):
    """Sup-distance between the empirical CDF of ``opinions`` and ``cdf``."""
    w = np.sort(np.asarray(opinions, dtype=float))
    n = w.size
    if n == 0:
        raise DomainError("KS distance needs at least one sample")
    f = np.asarray(cdf(w), dtype=float)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.max(hi - f), np.max(f - lo)))


class FrameBuilder:
    """Reusable per-step diagnostics for a fixed label set.

    The label bin of each agent is computed once, so a frame costs three
    ``bincount`` passes plus an optional sort for the KS distance.
    """

    def __init__(self, labels, x_bins=X_BINS, w_bins=W_BINS, cdf=None, ks_every=1):
        _check_bins(x_bins, w_bins)
        self.x_bins, self.w_bins = int(x_bins), int(w_bins)
        self.x_offset = _x_index(labels, x_bins) * w_bins
        self.cdf = cdf
        self.ks_every = max(int(ks_every), 1)
        self.area_w = 2.0 / w_bins
        self.area_xw = self.area_w / x_bins

    def frame(self, step, tau, opinions, accepted=0, clamped=0, warnings=()):
        w = opinions
        mean = float(w.mean())
        energy = float(np.dot(w, w) / w.size)
        variance = float(np.var(w))
        widx = _w_index(w, self.w_bins)
        cw = np.bincount(widx, minlength=self.w_bins).astype(float)
        cxw = np.bincount(self.x_offset + widx, minlength=self.x_bins * self.w_bins).astype(float)
        ks = math.nan
        if self.cdf is not None and step % self.ks_every == 0:
            ks = ks_distance(w, self.cdf)
        return DiagnosticsFrame(
            int(step), float(tau), mean, energy, variance,
            _plugin_entropy(cw, self.area_w), _plugin_entropy(cxw, self.area_xw),
            ks, int(accepted), int(clamped), tuple(warnings),
        )
