"""Simulation library for multi-armed bandits with cost subsidy."""

from .core import (
    ArmSpec,
    Benchmarks,
    Instance,
    PullRecord,
    RegretLedger,
    compute_benchmarks,
    draw_cost,
    draw_reward,
    instantaneous_regret,
    ledger_update,
    make_instance,
)
from .exceptions import (
    ConfigurationError,
    FactoryExhaustedError,
    InvalidInstanceError,
    InvalidParametersError,
    ProtocolError,
    SequencingError,
    SubsidyBanditError,
)
from .instances import (
    PhiParams,
    build_instance,
    make_fig1_example,
    make_phi,
    make_table1,
    make_ts_hard,
    with_random_costs,
)
from .policies import PolicySpec, confidence_radius, default_tau, make_policy
from .runner import (
    ExperimentConfig,
    Summary,
    export_csv,
    load_config,
    run_episode,
    run_replications,
    sweep,
)

__version__ = "0.1.0"
