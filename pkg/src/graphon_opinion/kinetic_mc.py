"""Monte Carlo evolution of an agent ensemble on a graphon.

Time is measured in the rescaled variable ``tau``.  Each step of length
``dt`` draws one random perfect matching of the agents; a pair ``(i, j)``
interacts with probability ``h B^Sigma(x_i, x_j)`` where ``h = dt/epsilon``
is the step in interaction time.  This is the forward-Euler splitting
``(1 - Sigma h) f + Sigma h S(f, f)/Sigma`` and requires ``Sigma h <= 1``.
An interacting pair is controlled with probability ``theta`` (both members
take the controlled update toward declustering) and otherwise undergoes the
noisy compromise rule.  All pair randomness comes from counter-based Philox
streams keyed by ``(pair, step)``, so sequential and threaded kernels give
identical results.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange

from . import rng as _rng
from .control import LabelStatsCache, SIDE_CONDITION_TOL, kappa_general, kappa_separable
from .diagnostics import FrameBuilder, histogram2d
from .errors import DomainError, SchemeError
from .graphon import (
    ConstantGraphon,
    Graphon,
    KNNGraphon,
    PowerLawGraphon,
    SmallWorldGraphon,
    StepGraphon,
    TruncatedGraphon,
)
from .interaction import CompromiseFunction, ControlParams, NoiseModel

__all__ = [
    "Ensemble",
    "ScaledParams",
    "StepResult",
    "RunResult",
    "Engine",
    "init_ensemble",
    "step",
    "run",
    "n_steps",
]

try:
    numba.config.THREADING_LAYER = "workqueue"
except Exception:  # pragma: no cover - depends on numba build
    pass

_K_CONST, _K_POWER, _K_BAND, _K_KNN, _K_STEP = range(5)
_P_UNIT, _P_EXP, _P_RATIONAL = range(3)


# ---------------------------------------------------------------------------
# ensemble


@dataclass
class Ensemble:
    """Agents with fixed labels and mutable opinions.

    ``step_count`` feeds the counter of the pair random streams and the
    seeded generator ``rng`` draws the pairings.
    """

    labels: np.ndarray
    opinions: np.ndarray
    seed: int
    rng: np.random.Generator
    step_count: int = 0

    @property
    def n(self):
        return self.labels.size

    def copy(self):
        rng = np.random.Generator(type(self.rng.bit_generator)())
        rng.bit_generator.state = self.rng.bit_generator.state
        return Ensemble(self.labels.copy(), self.opinions.copy(), self.seed, rng, self.step_count)


INITIAL_DEFAULT = {"kind": "truncated-gaussian", "mean": 0.0, "variance": 0.1}


def _truncated_gaussian(gen, n, mean, sd):
    out = np.empty(n)
    filled = 0
    while filled < n:
        draw = gen.normal(mean, sd, size=max(2 * (n - filled), 64))
        draw = draw[np.abs(draw) <= 1.0]
        take = min(draw.size, n - filled)
        out[filled:filled + take] = draw[:take]
        filled += take
    return out


def init_ensemble(n, seed, initial=None):
    """Sample ``n`` agents with uniform labels.

    ``initial`` selects the opinion law: ``{"kind": "truncated-gaussian",
    "mean", "variance"}`` (default mean 0 and variance 0.1 before
    truncation to [-1, 1]), ``{"kind": "uniform"}``, ``{"kind": "beta",
    "alpha_minus", "alpha_plus"}`` or ``{"kind": "constant", "value"}``.
    """
    n = int(n)
    if n < 2:
        raise DomainError("an ensemble needs at least 2 agents")
    seed = int(seed)
    if seed < 0:
        raise DomainError("seed must be nonnegative")
    spec = dict(INITIAL_DEFAULT if initial is None else initial)
    gen = np.random.default_rng([seed, 0])
    labels = gen.random(n)
    kind = spec.get("kind", "truncated-gaussian")
    if kind == "truncated-gaussian":
        var = float(spec.get("variance", 0.1))
        if not var > 0.0:
            raise DomainError("initial variance must be positive")
        opinions = _truncated_gaussian(gen, n, float(spec.get("mean", 0.0)), math.sqrt(var))
    elif kind == "uniform":
        opinions = gen.uniform(-1.0, 1.0, n)
    elif kind == "beta":
        a_m, a_p = float(spec["alpha_minus"]), float(spec["alpha_plus"])
        opinions = 2.0 * gen.beta(a_p + 1.0, a_m + 1.0, n) - 1.0
    elif kind == "constant":
        value = float(spec["value"])
        if abs(value) > 1.0:
            raise DomainError("constant initial opinion must lie in [-1, 1]")
        opinions = np.full(n, value)
    else:
        raise DomainError(f"unknown initial distribution {kind!r}")
    return Ensemble(labels, opinions, seed, np.random.default_rng([seed, 1]))


# ---------------------------------------------------------------------------
# scaling


@dataclass(frozen=True)
class ScaledParams:
    """Quasi-invariant scaling of the interaction parameters.

    ``gamma_scaled = gamma eps``, ``sigma2_scaled = sigma2 eps`` and
    ``nu_scaled = kappa eps``.  ``dt`` is the step in ``tau``; it defaults
    to ``eps / max(1, Sigma)`` so that ``Sigma dt / eps <= 1`` holds.
    """

    epsilon: float
    gamma: float
    sigma2: float
    kappa: float | None = None
    sigma_bound: float = 1.0
    dt: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise DomainError("epsilon must be positive")
        if not self.gamma > 0.0:
            raise DomainError("gamma must be positive")
        if not self.sigma2 >= 0.0:
            raise DomainError("sigma2 must be nonnegative")
        if self.kappa is not None and not self.kappa > 0.0:
            raise DomainError("kappa must be positive")
        if not self.sigma_bound > 0.0:
            raise DomainError("Sigma must be positive")
        if self.dt is None:
            object.__setattr__(self, "dt", self.epsilon / max(1.0, self.sigma_bound))
        if not self.dt > 0.0:
            raise DomainError("dt must be positive")
        if self.load > 1.0 + 1e-12:
            raise SchemeError(
                f"Sigma * dt / epsilon = {self.load:.6g} exceeds 1; reduce dt or Sigma"
            )
        if not self.gamma_scaled <= 0.5:
            raise SchemeError("gamma * epsilon must not exceed 1/2")

    @property
    def h(self):
        """Step length in interaction time, ``dt / epsilon``."""
        return self.dt / self.epsilon

    @property
    def load(self):
        return self.sigma_bound * self.h

    @property
    def gamma_scaled(self):
        return self.gamma * self.epsilon

    @property
    def sigma2_scaled(self):
        return self.sigma2 * self.epsilon

    @property
    def nu_scaled(self):
        return None if self.kappa is None else self.kappa * self.epsilon


def n_steps(t_final, dt):
    """Number of steps covering ``[0, t_final]``; must be integral."""
    if t_final < 0.0:
        raise DomainError("final time must be nonnegative")
    k = t_final / dt
    r = round(k)
    if abs(k - r) > 1e-9 * max(1.0, k):
        raise SchemeError(f"T / dt = {k:.12g} is not an integer")
    return int(r)


# ---------------------------------------------------------------------------
# compiled pair kernel


@njit(cache=True, inline="always")
def _kernel_value(kind, kp0, kp1, sigma, xi, xj, ai, aj, smat):
    if kind == _K_CONST:
        b = kp0
    elif kind == _K_POWER:
        b = kp0 * ai * aj
    elif kind == _K_BAND or kind == _K_KNN:
        d = abs(xi - xj)
        if 1.0 - d < d:
            d = 1.0 - d
        sw = 1.0 if d <= kp0 else 0.0
        if kind == _K_BAND:
            b = sw
        else:
            b = (1.0 - kp1) * sw + kp1 * (1.0 - sw)
    else:
        n = smat.shape[0]
        ci = min(int(xi * n), n - 1)
        cj = min(int(xj * n), n - 1)
        b = smat[ci, cj]
    return min(b, sigma)


@njit(cache=True, inline="always")
def _compromise(pkind, alpha, di, dj):
    if pkind == _P_UNIT:
        return 1.0
    r = di / dj
    if pkind == _P_EXP:
        return math.exp(-alpha * r)
    return (1.0 + r) ** (-alpha)


@njit(cache=True, inline="always")
def _clamp(v):
    if v > 1.0:
        return 1.0, 1
    if v < -1.0:
        return -1.0, 1
    return v, 0


@njit(cache=True, inline="always")
def _controlled(w, m, g2, nu):
    hi = (g2 * (1.0 + m) + nu) / (2.0 * g2 + nu)
    if abs(w) < hi:
        return w + g2 / (g2 + nu) * (w - m)
    return w


def _sweep(perm, labels, w, aux, deg, nu, smat, kind, kp0, kp1, sigma, pkind, palpha,
           h, theta, gamma, noise_bound, two_point, m, c1, c2, k0, k1):
    # one Bernoulli trial per disjoint pair; each agent is written by one
    # iteration only, so the loop may run in parallel
    acc = 0
    clamped = 0
    stream = np.uint64(_rng.STREAM_PAIRS)
    g2 = gamma * gamma
    for k in prange(perm.size // 2):
        i = perm[2 * k]
        j = perm[2 * k + 1]
        r0, r1, r2, r3 = _rng.philox4x32(np.uint64(k), c1, c2, stream, k0, k1)
        b = _kernel_value(kind, kp0, kp1, sigma, labels[i], labels[j], aux[i], aux[j], smat)
        if not (r0 + 0.5) * _rng.U32_SCALE < h * b:
            continue
        wi = w[i]
        wj = w[j]
        if (r1 + 0.5) * _rng.U32_SCALE < theta:
            ni = _controlled(wi, m, g2, nu[i])
            nj = _controlled(wj, m, g2, nu[j])
        else:
            u2 = (r2 + 0.5) * _rng.U32_SCALE
            u3 = (r3 + 0.5) * _rng.U32_SCALE
            if two_point:
                ei = noise_bound if u2 >= 0.5 else -noise_bound
                ej = noise_bound if u3 >= 0.5 else -noise_bound
            else:
                ei = noise_bound * (2.0 * u2 - 1.0)
                ej = noise_bound * (2.0 * u3 - 1.0)
            pij = _compromise(pkind, palpha, deg[i], deg[j])
            pji = _compromise(pkind, palpha, deg[j], deg[i])
            ni = wi - gamma * pij * (wi - wj) + ei * math.sqrt(max(0.0, 1.0 - wi * wi))
            nj = wj - gamma * pji * (wj - wi) + ej * math.sqrt(max(0.0, 1.0 - wj * wj))
        ni, ci = _clamp(ni)
        nj, cj = _clamp(nj)
        w[i] = ni
        w[j] = nj
        acc += 1
        clamped += ci + cj
    return acc, clamped


# Same source, two compilations.  Only the sequential one is cached: both
# would share a cache slot keyed on the function name.
_sweep_seq = njit(cache=True, nogil=True)(_sweep)
_sweep_par = njit(nogil=True, parallel=True)(_sweep)


# ---------------------------------------------------------------------------
# engine


def _kernel_spec(graphon, labels):
    """Translate a bounded graphon into the compiled kernel's arguments."""
    sigma = math.inf
    base = graphon
    if isinstance(graphon, TruncatedGraphon):
        sigma = graphon.sigma
        base = graphon.base
    empty = np.zeros((1, 1))
    ones = np.ones(labels.size)
    if isinstance(base, ConstantGraphon):
        spec = (_K_CONST, base.c, 0.0, ones, empty)
    elif isinstance(base, PowerLawGraphon):
        with np.errstate(divide="ignore"):
            aux = np.power(labels, -base.a)
        spec = (_K_POWER, base.c, base.a, aux, empty)
    elif isinstance(base, KNNGraphon):
        spec = (_K_KNN, base.r, base.p, ones, empty)
    elif isinstance(base, SmallWorldGraphon):
        spec = (_K_BAND, base.r, 0.0, ones, empty)
    elif isinstance(base, StepGraphon):
        spec = (_K_STEP, 0.0, 0.0, ones, np.ascontiguousarray(base.weights, dtype=float))
    else:
        raise DomainError(f"graphon kind {getattr(base, 'kind', base)!r} has no compiled kernel")
    bound = min(sigma, base.sup())
    if not math.isfinite(bound):
        raise SchemeError("unbounded graphon: truncate it before simulating")
    return spec, min(sigma, 1e300)


@dataclass(frozen=True)
class StepResult:
    accepted: int
    clamped: int
    mean: float
    warnings: tuple = ()


class Engine:
    """Prepared simulation of one ensemble under fixed model parameters.

    Building the engine precomputes per-agent kernel factors, degrees and
    (for the general penalty) the weighted-statistics cache; :meth:`advance`
    then performs steps in place.
    """

    def __init__(self, ensemble, graphon, scaled, P=None, noise=None, control=None,
                 parallel=False, side_tol=SIDE_CONDITION_TOL):
        if not isinstance(graphon, Graphon):
            raise DomainError("graphon must be a Graphon instance")
        self.ensemble = ensemble
        self.graphon = graphon
        self.scaled = scaled
        self.P = CompromiseFunction() if P is None else P
        self.noise = NoiseModel(scaled.sigma2) if noise is None else noise
        self.control = ControlParams(0.0) if control is None else control
        self.parallel = bool(parallel)
        self.side_tol = side_tol
        labels = ensemble.labels
        (self._kind, self._kp0, self._kp1, self._aux, self._smat), self._sigma = _kernel_spec(
            graphon, labels
        )
        sup = min(graphon.sup(), self._sigma)
        if sup * scaled.h > 1.0 + 1e-12:
            raise SchemeError(f"acceptance probability h * Sigma = {sup * scaled.h:.6g} exceeds 1")
        if self.P.is_unit:
            self._pkind, self._palpha, self._deg = _P_UNIT, 0.0, np.ones(labels.size)
        else:
            code = _P_EXP if self.P.kind == "degree-ratio-exp" else _P_RATIONAL
            self._pkind, self._palpha = code, self.P.alpha
            self._deg = np.ascontiguousarray(self.P.degree(labels))
        self._noise_bound = self.noise.scaled(scaled.epsilon).bound
        self._two_point = self.noise.shape == "two-point"
        self._k0, self._k1 = _rng.seed_key(ensemble.seed)
        self._perm = np.arange(labels.size, dtype=np.int64)
        self._stats = None
        self._nu = self._penalty_array()

    # penalties ------------------------------------------------------------

    def _penalty_array(self):
        ctl, sc = self.control, self.scaled
        n = self.ensemble.n
        if ctl.theta == 0.0:
            return np.ones(n)
        if ctl.kappa_mode == "fixed":
            return np.full(n, ctl.kappa * sc.epsilon)
        if ctl.kappa_mode == "separable":
            return np.full(n, kappa_separable(ctl.theta, sc.gamma, sc.sigma2) * sc.epsilon)
        self._stats = LabelStatsCache(self.ensemble.labels, self.graphon, self.P)
        self._degree = np.asarray(self.graphon.in_degree(self.ensemble.labels), dtype=float)
        return self._refresh_general()[0]

    def _refresh_general(self):
        ctl, sc = self.control, self.scaled
        stats = self._stats.stats(self.ensemble.opinions)
        pen = kappa_general(
            self.ensemble.labels, stats, self.graphon, ctl.theta, sc.gamma, sc.sigma2,
            degree=self._degree, tol=self.side_tol,
        )
        warnings = []
        if not pen.mean_ok:
            warnings.append("mean")
        defined = ~stats.undefined
        if np.any(np.abs(stats.mu_P[defined]) > self.side_tol):
            warnings.append("mu_P")
        return np.ascontiguousarray(pen.kappa * sc.epsilon), tuple(warnings)

    @property
    def nu(self):
        """Per-agent scaled penalty currently in use."""
        return self._nu

    # stepping -------------------------------------------------------------

    def advance(self):
        ens, sc = self.ensemble, self.scaled
        w = ens.opinions
        m = float(w.mean())
        warnings = ()
        if self._stats is not None:
            self._nu, warnings = self._refresh_general()
        ens.rng.shuffle(self._perm)
        s = ens.step_count
        sweep = _sweep_par if self.parallel else _sweep_seq
        acc, clamped = sweep(
            self._perm, ens.labels, w, self._aux, self._deg, self._nu, self._smat,
            self._kind, self._kp0, self._kp1, self._sigma, self._pkind, self._palpha,
            sc.h, self.control.theta, sc.gamma_scaled, self._noise_bound, self._two_point, m,
            np.uint64(s & 0xFFFFFFFF), np.uint64(s >> 32), self._k0, self._k1,
        )
        ens.step_count = s + 1
        if not (w.min() >= -1.0 and w.max() <= 1.0):
            raise AssertionError("opinion left [-1, 1]")
        return StepResult(int(acc), int(clamped), m, warnings)


def step(ensemble, graphon, P, noise, control, scaled, parallel=False):
    """Advance ``ensemble`` by one Monte Carlo step in place."""
    return Engine(ensemble, graphon, scaled, P, noise, control, parallel).advance()


# ---------------------------------------------------------------------------
# full runs


@dataclass
class RunResult:
    config: object
    frames: list
    snapshots: dict
    ensemble: Ensemble
    initial: object
    warning_steps: int = 0
    wall_time: float = 0.0
    meta: dict = field(default_factory=dict)


def run(config, progress=None):
    """Simulate ``config`` (a :class:`~graphon_opinion.config.SimConfig`).

    Records one frame per step (steps 1..n) and 2D histograms at the
    configured snapshot times; time 0 is the initial state.
    """
    from .config import build_model

    t0 = time.perf_counter()
    model = build_model(config)
    ens = init_ensemble(config.n_agents, config.seed, config.initial)
    scaled = model.scaled
    total = n_steps(config.t_final, scaled.dt)
    if config.threads:
        numba.set_num_threads(int(config.threads))
    engine = Engine(
        ens, model.graphon, scaled, model.P, model.noise, model.control,
        parallel=config.parallel,
    )
    oracle_cdf = model.oracle_cdf(ens)
    ks_every = config.ks_every or max(1, total // 200)
    builder = FrameBuilder(ens.labels, config.x_bins, config.w_bins, oracle_cdf, ks_every)
    snap_steps = {}
    for t in config.snapshot_times:
        snap_steps.setdefault(n_steps(t, scaled.dt) if t > 0 else 0, []).append(t)
    snapshots = {}

    def snap(k):
        for t in snap_steps.get(k, ()):
            snapshots[t] = histogram2d(ens.labels, ens.opinions, config.x_bins, config.w_bins)

    initial = builder.frame(0, 0.0, ens.opinions)
    if oracle_cdf is not None:
        from .diagnostics import ks_distance
        initial = _with_ks(initial, ks_distance(ens.opinions, oracle_cdf))
    snap(0)
    frames = []
    warn_steps = 0
    for k in range(1, total + 1):
        res = engine.advance()
        if res.warnings:
            warn_steps += 1
        fr = builder.frame(k, k * scaled.dt, ens.opinions, res.accepted, res.clamped, res.warnings)
        if k == total and oracle_cdf is not None and math.isnan(fr.ks_vs_oracle):
            from .diagnostics import ks_distance
            fr = _with_ks(fr, ks_distance(ens.opinions, oracle_cdf))
        frames.append(fr)
        snap(k)
        if progress is not None:
            progress(k, total)
    return RunResult(
        config, frames, snapshots, ens, initial, warn_steps, time.perf_counter() - t0,
        {"n_steps": total, "dt": scaled.dt, "sigma": engine._sigma, "ks_every": ks_every},
    )


def _with_ks(frame, ks):
    from dataclasses import replace

    return replace(frame, ks_vs_oracle=float(ks))
