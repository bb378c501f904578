"""Kinetic opinion dynamics on graphons.

Graphon kernels, binary compromise and declustering-control updates, a
Monte Carlo particle scheme, analytic equilibria and ensemble diagnostics.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DivergenceError, DomainError, QuadratureError, SchemeError
from .graphon import (
    ConstantGraphon,
    Graphon,
    KNNGraphon,
    PowerLawGraphon,
    SmallWorldGraphon,
    StepGraphon,
    TruncatedGraphon,
    density,
    load_matrix_csv,
    step_graphon,
    truncate,
)
from .interaction import (
    CompromiseFunction,
    ControlParams,
    NoiseModel,
    admissible_noise_bound,
    binary_update,
    control_gain,
    controlled_update,
    pairwise_mean_shift,
    selection_interval,
)
from .control import WeightedStats, kappa_general, kappa_separable, weighted_stats
from .oracle import (
    ConsensusRate,
    DeclusterRate,
    QuasiEquilibrium,
    beta_equilibrium,
    controlled_exponents,
    uniform_target,
    variance_decay_bound,
)
from .diagnostics import (
    DiagnosticsFrame,
    entropy,
    histogram1d,
    histogram2d,
    ks_distance,
    marginal_moments,
    weighted_moment,
)
from .kinetic_mc import Ensemble, Engine, ScaledParams, init_ensemble, run, step
from .config import SimConfig, emit, load_config, preset
