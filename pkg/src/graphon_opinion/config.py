"""Run configuration: flat JSON schema, built-in presets and model assembly.

Precedence when loading is command-line overrides, then file keys, then the
preset the file names (or the defaults below).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .control import kappa_separable
from .errors import ConfigError, DomainError, SchemeError
from .graphon import (
    ConstantGraphon,
    KNNGraphon,
    PowerLawGraphon,
    SmallWorldGraphon,
    StepGraphon,
    grid_sup,
    load_matrix_csv,
    truncate,
)
from .interaction import CompromiseFunction, ControlParams, NoiseModel

__all__ = [
    "SimConfig",
    "Model",
    "PRESETS",
    "preset",
    "load_config",
    "from_dict",
    "emit",
    "config_hash",
    "build_model",
]

GRAPHON_KINDS = ("constant", "power-law", "small-world", "knn", "step")
ORACLES = ("auto", "none", "beta", "uniform")


@dataclass(frozen=True)
class SimConfig:
    """All parameters of one run.

    ``sigma2`` is absolute when set, otherwise ``sigma2_fraction * gamma``.
    ``sigma_trunc`` is the kernel bound Sigma (grid maximum of the kernel
    when ``None``; required for power-law).  ``dt`` defaults to
    ``epsilon / max(1, Sigma)``.  ``ks_every = 0`` picks about 200 KS
    evaluations per run.
    """

    preset: str | None = None
    n_agents: int = 100_000
    epsilon: float = 5e-4
    t_final: float = 8.0
    dt: float | None = None
    theta: float = 0.1
    gamma: float = 1.0
    sigma2: float | None = None
    sigma2_fraction: float = 0.25
    kappa_mode: str = "separable"
    kappa_fixed: float | None = None
    graphon_kind: str = "constant"
    graphon_c: float = 1.0
    graphon_a: float = 0.25
    graphon_r: float = 0.125
    graphon_p: float = 0.75
    graphon_matrix: str | None = None
    sigma_trunc: float | None = None
    compromise_kind: str = "unit"
    compromise_alpha: float = 1.0
    noise_shape: str = "uniform"
    initial_kind: str = "truncated-gaussian"
    initial_mean: float = 0.0
    initial_variance: float = 0.1
    x_bins: int = 64
    w_bins: int = 64
    snapshot_times: tuple = (0.0, 8.0)
    ks_every: int = 0
    oracle: str = "auto"
    seed: int = 0
    output_dir: str = "out"
    parallel: bool = False
    threads: int = 0

    @property
    def sigma2_value(self):
        return self.sigma2 if self.sigma2 is not None else self.sigma2_fraction * self.gamma

    @property
    def initial(self):
        if self.initial_kind == "truncated-gaussian":
            return {"kind": self.initial_kind, "mean": self.initial_mean,
                    "variance": self.initial_variance}
        return {"kind": self.initial_kind}

    def replace(self, **changes):
        return from_dict({**to_dict(self), **changes})


_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}

PRESETS = {
    "homogeneous": {
        "graphon_kind": "constant", "graphon_c": 1.0, "epsilon": 5e-4, "t_final": 8.0,
        "theta": 0.1, "kappa_mode": "separable", "snapshot_times": [0.0, 4.0, 8.0],
    },
    "power-law": {
        "graphon_kind": "power-law", "graphon_c": 9 / 16, "graphon_a": 0.25,
        "sigma_trunc": 4.0, "epsilon": 5e-4, "t_final": 32.0, "theta": 0.1,
        "kappa_mode": "separable", "snapshot_times": [0.0, 16.0, 32.0],
    },
    "small-world": {
        "graphon_kind": "small-world", "graphon_r": 0.125, "epsilon": 1e-3, "t_final": 8.0,
        "theta": 0.1, "kappa_mode": "general", "snapshot_times": [0.0, 4.0, 8.0],
    },
    "knn": {
        "graphon_kind": "knn", "graphon_r": 0.125, "graphon_p": 0.75, "epsilon": 1e-3,
        "t_final": 8.0, "theta": 0.1, "kappa_mode": "general",
        "snapshot_times": [0.0, 4.0, 8.0],
    },
    "uncontrolled-beta": {
        "graphon_kind": "constant", "graphon_c": 1.0, "epsilon": 5e-4, "t_final": 8.0,
        "theta": 0.0, "kappa_mode": "separable", "snapshot_times": [0.0, 8.0],
    },
}


# ---------------------------------------------------------------------------
# schema


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _coerce(key, value):
    default = _FIELDS[key].default
    optional = default is None or key in ("sigma2", "dt", "kappa_fixed", "sigma_trunc",
                                          "graphon_matrix", "preset")
    if value is None:
        if optional:
            return None
        raise ConfigError("must not be null", key)
    if key == "snapshot_times":
        if not isinstance(value, (list, tuple)):
            raise ConfigError("must be a list of times", key)
        out = []
        for i, t in enumerate(value):
            if not _is_real(t) or t < 0:
                raise ConfigError("must be a nonnegative real", f"{key}[{i}]")
            out.append(float(t))
        return tuple(out)
    if key in ("parallel",):
        if not isinstance(value, bool):
            raise ConfigError("must be a boolean", key)
        return value
    if key in ("n_agents", "x_bins", "w_bins", "ks_every", "seed", "threads"):
        if not _is_int(value):
            raise ConfigError("must be an integer", key)
        return int(value)
    if isinstance(default, str) or key in ("graphon_matrix", "preset"):
        if not isinstance(value, str):
            raise ConfigError("must be a string", key)
        return value
    if not _is_real(value):
        raise ConfigError("must be a finite real", key)
    return float(value)


def _validate(cfg):
    def need(cond, msg, key):
        if not cond:
            raise ConfigError(msg, key)

    need(cfg.n_agents >= 2, "needs at least 2 agents", "n_agents")
    need(cfg.epsilon > 0, "must be positive", "epsilon")
    need(cfg.t_final >= 0, "must be nonnegative", "t_final")
    need(cfg.dt is None or cfg.dt > 0, "must be positive", "dt")
    need(0.0 <= cfg.theta < 1.0, "must lie in [0, 1)", "theta")
    need(cfg.gamma > 0, "must be positive", "gamma")
    need(cfg.sigma2_value >= 0, "must be nonnegative", "sigma2")
    need(cfg.kappa_mode in ControlParams.MODES, f"must be one of {ControlParams.MODES}", "kappa_mode")
    if cfg.kappa_mode == "fixed":
        need(cfg.kappa_fixed is not None and cfg.kappa_fixed > 0, "must be positive", "kappa_fixed")
    need(cfg.graphon_kind in GRAPHON_KINDS, f"must be one of {GRAPHON_KINDS}", "graphon_kind")
    if cfg.graphon_kind == "step":
        need(cfg.graphon_matrix is not None, "step graphon needs a matrix CSV path", "graphon_matrix")
    need(cfg.sigma_trunc is None or cfg.sigma_trunc > 0, "must be positive", "sigma_trunc")
    if cfg.graphon_kind == "power-law":
        need(cfg.sigma_trunc is not None, "power-law kernel needs a truncation bound", "sigma_trunc")
    need(cfg.compromise_kind in CompromiseFunction.KINDS,
         f"must be one of {CompromiseFunction.KINDS}", "compromise_kind")
    need(cfg.noise_shape in NoiseModel.SHAPES, f"must be one of {NoiseModel.SHAPES}", "noise_shape")
    need(cfg.initial_kind in ("truncated-gaussian", "uniform"),
         "must be 'truncated-gaussian' or 'uniform'", "initial_kind")
    need(cfg.initial_variance > 0, "must be positive", "initial_variance")
    need(cfg.x_bins >= 1, "must be at least 1", "x_bins")
    need(cfg.w_bins >= 1, "must be at least 1", "w_bins")
    need(cfg.ks_every >= 0, "must be nonnegative", "ks_every")
    need(cfg.oracle in ORACLES, f"must be one of {ORACLES}", "oracle")
    need(cfg.seed >= 0, "must be nonnegative", "seed")
    need(cfg.threads >= 0, "must be nonnegative", "threads")
    for i, t in enumerate(cfg.snapshot_times):
        need(t <= cfg.t_final, "lies beyond t_final", f"snapshot_times[{i}]")


def to_dict(cfg):
    d = dataclasses.asdict(cfg)
    d["snapshot_times"] = list(cfg.snapshot_times)
    return d


def from_dict(data, check_physics=True):
    """Validated :class:`SimConfig` from a flat mapping of overrides."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    values = {}
    for key, value in data.items():
        if key not in _FIELDS:
            raise ConfigError("unknown key", key)
        values[key] = _coerce(key, value)
    cfg = SimConfig(**values)
    _validate(cfg)
    if check_physics:
        build_model(cfg)
    return cfg


def preset(name, **overrides):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "preset")
    return from_dict({**PRESETS[name], "preset": name, **overrides})


def load_config(source=None, overrides=None):
    """Load a preset name or JSON file, then apply ``overrides``.

    A file may name a ``preset`` whose values its own keys override.
    """
    data = {}
    if source is not None:
        src = str(source)
        if src in PRESETS:
            data = {**PRESETS[src], "preset": src}
        else:
            path = Path(src)
            if not path.is_file():
                raise ConfigError(f"no preset or file named {src!r}")
            try:
                raw = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
            if not isinstance(raw, dict):
                raise ConfigError(f"{path}: top level must be an object")
            name = raw.get("preset")
            if name is not None:
                if name not in PRESETS:
                    raise ConfigError(f"unknown preset {name!r}", "preset")
                data = dict(PRESETS[name])
            data.update(raw)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return from_dict(data)


def emit(cfg):
    """Canonical JSON text of ``cfg`` (every field, sorted keys)."""
    return json.dumps(to_dict(cfg), sort_keys=True, indent=2) + "\n"


def config_hash(cfg):
    return hashlib.sha256(json.dumps(to_dict(cfg), sort_keys=True).encode()).hexdigest()


# ---------------------------------------------------------------------------
# model assembly


@dataclass
class Model:
    graphon: object
    P: CompromiseFunction
    noise: NoiseModel
    control: ControlParams
    scaled: object
    oracle: str = "none"
    extra: dict = field(default_factory=dict)

    def oracle_cdf(self, ensemble):
        """CDF the opinions are compared against, fixed from the initial
        ensemble, or ``None``."""
        from .control import weighted_stats
        from .oracle import beta_equilibrium, uniform_target

        if self.oracle == "uniform":
            return uniform_target().cdf
        if self.oracle == "beta":
            st = weighted_stats(ensemble.labels, ensemble.opinions, self.graphon, self.P,
                                x_grid=[0.5])
            ratio = st.mean_ratio if st.mean_ratio is not None else st.m
            lam = self.scaled.sigma2 / self.scaled.gamma
            return beta_equilibrium(lam, ratio).cdf
        return None


def _base_graphon(cfg):
    kind = cfg.graphon_kind
    if kind == "constant":
        return ConstantGraphon(cfg.graphon_c)
    if kind == "power-law":
        return PowerLawGraphon(cfg.graphon_c, cfg.graphon_a)
    if kind == "small-world":
        return SmallWorldGraphon(cfg.graphon_r)
    if kind == "knn":
        return KNNGraphon(cfg.graphon_r, cfg.graphon_p)
    return StepGraphon(load_matrix_csv(cfg.graphon_matrix))


def _resolve_oracle(cfg, graphon, P):
    if cfg.oracle != "auto":
        return cfg.oracle
    if cfg.theta == 0.0:
        separable = graphon.factors() is not None and P.is_unit
        return "beta" if separable and cfg.sigma2_value > 0 else "none"
    return "uniform" if cfg.kappa_mode != "fixed" else "none"


def build_model(cfg):
    """Graphon (truncated at Sigma), compromise, noise, control and scaling."""
    from .kinetic_mc import ScaledParams

    try:
        base = _base_graphon(cfg)
    except DomainError as exc:
        raise ConfigError(str(exc), "graphon_kind") from None
    sigma = cfg.sigma_trunc if cfg.sigma_trunc is not None else grid_sup(base)
    if not sigma > 0:
        raise ConfigError("kernel vanishes on the grid; set sigma_trunc", "sigma_trunc")
    graphon = truncate(base, sigma)
    try:
        P = CompromiseFunction(cfg.compromise_kind, cfg.compromise_alpha, graphon)
    except DomainError as exc:
        raise ConfigError(str(exc), "compromise_kind") from None
    sigma2 = cfg.sigma2_value
    noise = NoiseModel(sigma2, cfg.noise_shape)
    control = ControlParams(cfg.theta, cfg.kappa_mode, cfg.kappa_fixed)
    kappa = None
    if cfg.theta > 0:
        if cfg.kappa_mode == "fixed":
            kappa = cfg.kappa_fixed
        else:
            # physical check: raises when gamma <= sigma2
            k = kappa_separable(cfg.theta, cfg.gamma, sigma2)
            kappa = k if cfg.kappa_mode == "separable" else None
    scaled = ScaledParams(cfg.epsilon, cfg.gamma, sigma2, kappa, sigma, cfg.dt)
    if scaled.gamma_scaled > 0.5:
        raise SchemeError("gamma * epsilon must not exceed 1/2")
    from .kinetic_mc import n_steps

    n_steps(cfg.t_final, scaled.dt)
    for t in cfg.snapshot_times:
        n_steps(t, scaled.dt)
    return Model(graphon, P, noise, control, scaled, _resolve_oracle(cfg, graphon, P))
