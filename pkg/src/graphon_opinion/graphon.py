"""Graphon kernels on the unit square.

A graphon is a nonnegative kernel ``B(x, y)`` on ``[0, 1]^2``; agents carry a
fixed label ``x`` and interact with frequency ``B(x, y)``.  The named families
below cover the experiments (constant, power-law, small-world band, k-NN
mixture) plus step graphons built from finite adjacency or weight matrices.
Unbounded kernels must be wrapped with :func:`truncate` before they are used
as acceptance probabilities in the Monte Carlo scheme.

All evaluation is vectorised over numpy arrays and pure.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import DivergenceError, DomainError, QuadratureError

__all__ = [
    "Graphon",
    "ConstantGraphon",
    "PowerLawGraphon",
    "SmallWorldGraphon",
    "KNNGraphon",
    "StepGraphon",
    "TruncatedGraphon",
    "truncate",
    "step_graphon",
    "density",
    "load_matrix_csv",
    "quad_in_degree",
    "quad_out_degree",
    "quad_p_norm",
    "grid_sup",
]

QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-13


def _check_unit(name, v):
    v = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v < 0.0) or np.any(v > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return v


def _quad(f, points=()):
    pts = sorted({float(p) for p in points if 0.0 < p < 1.0})
    out = integrate.quad(
        f, 0.0, 1.0, points=pts or None, epsabs=QUAD_ATOL, epsrel=QUAD_RTOL,
        limit=500, full_output=1,
    )
    if len(out) > 3:
        raise QuadratureError(f"quadrature did not converge: {out[3]}")
    return out[0]


class Graphon:
    """Base class.  Subclasses implement ``_eval`` on arrays already known to
    lie in the unit square and override the closed forms they have."""

    kind = "generic"
    symmetric = True

    def __call__(self, x, y):
        return self.eval(x, y)

    def eval(self, x, y):
        x = _check_unit("x", x)
        y = _check_unit("y", y)
        out = self._eval(x, y)
        return float(out) if np.ndim(out) == 0 else out

    def _eval(self, x, y):
        raise NotImplementedError

    def breakpoints(self, x):
        """Points in ``(0, 1)`` where ``y -> B(x, y)`` is not smooth."""
        return ()

    def sup(self):
        """Essential supremum; ``inf`` for unbounded kernels."""
        raise NotImplementedError

    def factors(self):
        """Return ``(B1, B2)`` with ``B(x, y) = B1(x) B2(y)``, or ``None``."""
        return None

    def in_degree(self, x):
        x = _check_unit("x", x)
        out = np.vectorize(lambda v: quad_in_degree(self, v), otypes=[float])(x)
        return float(out) if out.ndim == 0 else out

    def out_degree(self, y):
        if self.symmetric:
            return self.in_degree(y)
        y = _check_unit("y", y)
        out = np.vectorize(lambda v: quad_out_degree(self, v), otypes=[float])(y)
        return float(out) if out.ndim == 0 else out

    def p_norm(self, p):
        return quad_p_norm(self, p)

    def describe(self):
        return {"kind": self.kind}


class ConstantGraphon(Graphon):
    """``B(x, y) = c``; ``c = 1`` is the fully connected network."""

    kind = "constant"

    def __init__(self, c=1.0):
        if not 0.0 < c <= 1.0:
            raise DomainError("constant graphon needs 0 < c <= 1")
        self.c = float(c)

    def _eval(self, x, y):
        return np.full(np.broadcast(x, y).shape, self.c)

    def sup(self):
        return self.c

    def factors(self):
        c = self.c
        return (lambda x: np.full(np.shape(x), c), lambda y: np.ones(np.shape(y)))

    def in_degree(self, x):
        x = _check_unit("x", x)
        out = np.full(x.shape, self.c)
        return float(out) if out.ndim == 0 else out

    def p_norm(self, p):
        _check_p(p)
        return self.c

    def describe(self):
        return {"kind": self.kind, "c": self.c}


class PowerLawGraphon(Graphon):
    """Scale-free kernel ``B(x, y) = c (x y)^(-a)`` with ``0 < a < 1``.

    Unbounded near the origin; the degree ``d(x) = c x^(-a) / (1 - a)`` is
    finite for ``x > 0``.
    """

    kind = "power-law"

    def __init__(self, c=9 / 16, a=0.25):
        if not c > 0.0:
            raise DomainError("power-law graphon needs c > 0")
        if not 0.0 < a < 1.0:
            raise DomainError("power-law graphon needs 0 < a < 1")
        self.c = float(c)
        self.a = float(a)

    def _eval(self, x, y):
        with np.errstate(divide="ignore"):
            return self.c * np.power(x * y, -self.a)

    def sup(self):
        return math.inf

    def factors(self):
        # splitting B1 = c x^-a, B2 = y^-a
        c, a = self.c, self.a
        with np.errstate(divide="ignore"):
            return (lambda x: c * np.power(np.asarray(x, float), -a),
                    lambda y: np.power(np.asarray(y, float), -a))

    def in_degree(self, x):
        x = _check_unit("x", x)
        with np.errstate(divide="ignore"):
            out = self.c * np.power(x, -self.a) / (1.0 - self.a)
        return float(out) if out.ndim == 0 else out

    def p_norm(self, p):
        _check_p(p)
        if math.isinf(p):
            return math.inf
        if p * self.a >= 1.0:
            raise DivergenceError(f"power-law L^{p} norm diverges for a = {self.a}")
        return self.c / (1.0 - p * self.a) ** (2.0 / p)

    def describe(self):
        return {"kind": self.kind, "c": self.c, "a": self.a}


def _band(x, y, r):
    d = np.abs(x - y)
    return (np.minimum(d, 1.0 - d) <= r).astype(float)


class SmallWorldGraphon(Graphon):
    """Wrap-around band indicator ``chi(min(|x-y|, 1-|x-y|) <= r)``."""

    kind = "small-world"

    def __init__(self, r=0.125):
        if not 0.0 < r < 1.0:
            raise DomainError("small-world graphon needs 0 < r < 1")
        self.r = float(r)

    def _eval(self, x, y):
        return _band(x, y, self.r)

    def breakpoints(self, x):
        return [(x - self.r) % 1.0, (x + self.r) % 1.0]

    def sup(self):
        return 1.0

    def band_measure(self):
        return min(2.0 * self.r, 1.0)

    def in_degree(self, x):
        x = _check_unit("x", x)
        out = np.full(x.shape, self.band_measure())
        return float(out) if out.ndim == 0 else out

    def p_norm(self, p):
        _check_p(p)
        if math.isinf(p):
            return 1.0
        return self.band_measure() ** (1.0 / p)

    def describe(self):
        return {"kind": self.kind, "r": self.r}


class KNNGraphon(Graphon):
    """Rewired band ``(1 - p) SW(x, y) + p (1 - SW(x, y))``.

    ``SW`` is the small-world band of radius ``r``; ``p`` is the rewiring
    weight placed off the band.
    """

    kind = "knn"

    def __init__(self, r=0.125, p=0.75):
        if not 0.0 < r < 1.0:
            raise DomainError("k-NN graphon needs 0 < r < 1")
        if not 0.0 < p < 1.0:
            raise DomainError("k-NN graphon needs 0 < p < 1")
        self.r = float(r)
        self.p = float(p)

    def _eval(self, x, y):
        sw = _band(x, y, self.r)
        return (1.0 - self.p) * sw + self.p * (1.0 - sw)

    def breakpoints(self, x):
        return [(x - self.r) % 1.0, (x + self.r) % 1.0]

    def _levels(self):
        band = min(2.0 * self.r, 1.0)
        return [(1.0 - self.p, band), (self.p, 1.0 - band)]

    def sup(self):
        return max(v for v, m in self._levels() if m > 0.0)

    def in_degree(self, x):
        x = _check_unit("x", x)
        out = np.full(x.shape, sum(v * m for v, m in self._levels()))
        return float(out) if out.ndim == 0 else out

    def p_norm(self, p):
        _check_p(p)
        if math.isinf(p):
            return self.sup()
        return sum(m * v**p for v, m in self._levels()) ** (1.0 / p)

    def describe(self):
        return {"kind": self.kind, "r": self.r, "p": self.p}


class StepGraphon(Graphon):
    """Piecewise-constant graphon: value ``W[i, j]`` on cell ``I_i x I_j``.

    ``I_i = [i/n, (i+1)/n)`` (zero-based), with ``x = 1`` assigned to the last
    cell.
    """

    kind = "step"

    def __init__(self, weights):
        w = np.array(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise DomainError("step graphon needs a nonempty square matrix")
        if np.any(~np.isfinite(w)) or np.any(w < 0.0):
            raise DomainError("step graphon weights must be finite and nonnegative")
        w.setflags(write=False)
        self.weights = w
        self.symmetric = bool(np.array_equal(w, w.T))

    @property
    def n_nodes(self):
        return self.weights.shape[0]

    def cell(self, x):
        n = self.n_nodes
        return np.minimum((np.asarray(x) * n).astype(np.int64), n - 1)

    def _eval(self, x, y):
        return self.weights[self.cell(x), self.cell(y)]

    def breakpoints(self, x):
        n = self.n_nodes
        return [k / n for k in range(1, n)]

    def sup(self):
        return float(self.weights.max())

    def in_degree(self, x):
        x = _check_unit("x", x)
        out = self.weights.mean(axis=1)[self.cell(x)]
        return float(out) if out.ndim == 0 else out

    def out_degree(self, y):
        y = _check_unit("y", y)
        out = self.weights.mean(axis=0)[self.cell(y)]
        return float(out) if out.ndim == 0 else out

    def p_norm(self, p):
        _check_p(p)
        if math.isinf(p):
            return self.sup()
        return float(np.mean(self.weights**p) ** (1.0 / p))

    def describe(self):
        return {"kind": self.kind, "weights": self.weights.tolist()}


class TruncatedGraphon(Graphon):
    """``min(B(x, y), sigma)`` for a base kernel ``B``."""

    kind = "truncated"

    def __init__(self, base, sigma):
        if not sigma > 0.0 or math.isnan(sigma):
            raise DomainError("truncation bound must be positive")
        if isinstance(base, TruncatedGraphon):
            sigma = min(sigma, base.sigma)
            base = base.base
        self.base = base
        self.sigma = float(sigma)
        self.symmetric = base.symmetric

    @property
    def active(self):
        """True when the bound actually clips the base kernel somewhere."""
        return self.sigma < self.base.sup()

    def _eval(self, x, y):
        return np.minimum(self.base._eval(x, y), self.sigma)

    def _clip_point(self, x):
        # y below which c x^-a y^-a exceeds sigma
        b = self.base
        with np.errstate(divide="ignore"):
            amp = b.c * np.power(x, -b.a)
        return np.power(amp / self.sigma, 1.0 / b.a)

    def breakpoints(self, x):
        pts = list(self.base.breakpoints(x))
        if isinstance(self.base, PowerLawGraphon):
            pts.append(float(self._clip_point(x)))
        return pts

    def sup(self):
        return min(self.base.sup(), self.sigma)

    def factors(self):
        return None if self.active else self.base.factors()

    def in_degree(self, x):
        if not self.active:
            return self.base.in_degree(x)
        b = self.base
        if isinstance(b, PowerLawGraphon):
            x = _check_unit("x", x)
            ystar = np.minimum(self._clip_point(x), 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                amp = b.c * np.power(x, -b.a)
                tail = amp * (1.0 - np.power(ystar, 1.0 - b.a)) / (1.0 - b.a)
            out = self.sigma * ystar + np.where(ystar < 1.0, tail, 0.0)
            return float(out) if out.ndim == 0 else out
        if isinstance(b, ConstantGraphon):
            return ConstantGraphon(min(b.c, self.sigma)).in_degree(x)
        if isinstance(b, StepGraphon):
            return StepGraphon(np.minimum(b.weights, self.sigma)).in_degree(x)
        return super().in_degree(x)

    def out_degree(self, y):
        if not self.active:
            return self.base.out_degree(y)
        if isinstance(self.base, StepGraphon):
            return StepGraphon(np.minimum(self.base.weights, self.sigma)).out_degree(y)
        return super().out_degree(y)

    def p_norm(self, p):
        _check_p(p)
        if not self.active:
            return self.base.p_norm(p)
        if math.isinf(p):
            return self.sup()
        if isinstance(self.base, StepGraphon):
            return StepGraphon(np.minimum(self.base.weights, self.sigma)).p_norm(p)
        return quad_p_norm(self, p)

    def describe(self):
        return {**self.base.describe(), "sigma": self.sigma}


def _check_p(p):
    if not (p >= 1.0 or math.isinf(p)):
        raise DomainError("p-norm needs p >= 1 or p = inf")


def truncate(g, sigma):
    """Clip ``g`` at ``sigma``; the result never exceeds ``sigma``."""
    return TruncatedGraphon(g, sigma)


def step_graphon(weights):
    """Step graphon of a finite (weighted) graph given by its matrix."""
    return StepGraphon(weights)


def density(adjacency):
    """Edge density ``|E| / (|V| (|V| - 1))`` of a simple directed graph."""
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("adjacency matrix must be square")
    n = a.shape[0]
    if n < 2:
        raise DomainError("density needs at least two nodes")
    if not np.all((a == 0) | (a == 1)):
        raise DomainError("adjacency entries must be 0 or 1")
    if np.any(np.diag(a) != 0):
        raise DomainError("adjacency matrix must have a zero diagonal")
    return float(a.sum()) / (n * (n - 1))


def load_matrix_csv(path):
    """Read a square nonnegative matrix, one comma-separated row per line."""
    rows = []
    with Path(path).open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: {exc}") from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DomainError(f"{path}: matrix is not square")
    m = np.array(rows)
    if np.any(m < 0.0):
        raise DomainError(f"{path}: negative weight")
    return m


def quad_in_degree(g, x):
    """``int_0^1 g(x, y) dy`` by adaptive quadrature (independent of the
    closed forms)."""
    x = float(x)
    xv = np.array(x)
    return _quad(lambda y: float(g._eval(xv, np.array(y))), g.breakpoints(x))


def quad_out_degree(g, y):
    y = float(y)
    yv = np.array(y)
    # breakpoints are symmetric for every family; step cells are a fixed grid
    return _quad(lambda x: float(g._eval(np.array(x), yv)), g.breakpoints(y))


def quad_p_norm(g, p):
    """L^p norm on the unit square by nested adaptive quadrature."""
    _check_p(p)
    if math.isinf(p):
        return g.sup()

    def inner(x):
        xv = np.array(x)
        return _quad(lambda y: float(g._eval(xv, np.array(y))) ** p, g.breakpoints(x))

    base = g.base if isinstance(g, TruncatedGraphon) else g
    outer_pts = ()
    if isinstance(base, StepGraphon):
        outer_pts = base.breakpoints(0.5)
    elif isinstance(g, TruncatedGraphon) and isinstance(base, PowerLawGraphon):
        # first label whose whole row is clipped
        outer_pts = [(base.c / g.sigma) ** (1.0 / base.a)]
    return _quad(inner, outer_pts) ** (1.0 / p)


def grid_sup(g, n=256):
    """Maximum of ``g`` over an ``n x n`` grid including the borders."""
    t = np.linspace(0.0, 1.0, n)
    with np.errstate(divide="ignore"):
        return float(np.max(g._eval(t[:, None], t[None, :])))
