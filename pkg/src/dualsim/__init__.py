"""dualsim: one model family, two simulation paradigms, and the statistics
to decide whether they agree.

Tumour growth laws and the Kuznetsov tumour-effector system run both as
deterministic stock-and-flow ODE integrations and as stochastic discrete
birth-death processes (exact event simulation or tau-leaping), sharing one
definition of the model mathematics.  Grid-aligned comparisons with a
rank-sum test quantify paradigm agreement, including the discrete-extinction
divergence and the extinction-floor fixes that reconcile it.
"""

from .errors import (
    ConfigError,
    DualsimError,
    EngineError,
    ModelDomainError,
    PopulationCapError,
    UnknownScenarioError,
)
from .kernels import BACKEND_NAME
from .models import (
    GrowthKind,
    GrowthLaw,
    KuznetsovParams,
    PopulationState,
    experiment_one_law,
    growth_f,
    kuznetsov_derivatives,
    percapita_rates,
    scenario_preset,
)
from .sds import IntegratorConfig, closed_form, closed_form_log, integrate
from .ssa import (
    POPULATION_CAP,
    Channel,
    ChannelSet,
    Ensemble,
    EnsembleSpec,
    Floors,
    RateLaw,
    RatePolicy,
    growth_channels,
    kuznetsov_channels,
    run_ensemble,
    simulate_exact,
    simulate_tau_leap,
)
from .stats import (
    ComparisonReport,
    GridSeries,
    Interp,
    PValueMode,
    WilcoxonResult,
    compare,
    ensemble_mean,
    make_grid,
    sample_on_grid,
    wilcoxon_ranksum,
)
from .trajectory import Paradigm, Termination, Trajectory

__version__ = "0.1.0"
