"""GPR-guided selective channel-load scanning simulator.

Estimate per-channel 802.11 traffic load from sparse clear-channel-assessment
measurements, probe only the K most informative channels per round, and
replay both the selective and the exhaustive scan against one pre-generated
load matrix to compare selected load and measurement cost.
"""

from .cca import (
    LoadMatrix,
    MeasurementTiming,
    RawMeasurement,
    TrafficModel,
    generate_matrix,
    measure,
    n_of_T,
)
from .errors import ConfigError, TraceParseError
from .gpr import DegeneracyError, KernelParams, Posterior, kernel, posterior, solve_spd
from .harness import (
    ExperimentSummary,
    RoundRecord,
    estimation_error,
    run_exhaustive,
    run_selective,
    sweep,
)
from .selection import (
    POLICIES,
    SwitchDecision,
    bootstrap_length,
    bootstrap_schedule,
    canonical_policy,
    choose_operating_channel,
    exhaustive_select,
    select_set,
    weight,
)
from .tracker import ChannelHistory, EstimateVector, LoadTracker, OrderingError
from .traceio import ingest_trace, parse_trace, trace_csv_text, write_trace

__version__ = "0.1.0"

__all__ = [
    "ChannelHistory",
    "ConfigError",
    "DegeneracyError",
    "EstimateVector",
    "ExperimentSummary",
    "KernelParams",
    "LoadMatrix",
    "LoadTracker",
    "MeasurementTiming",
    "OrderingError",
    "POLICIES",
    "Posterior",
    "RawMeasurement",
    "RoundRecord",
    "SwitchDecision",
    "TraceParseError",
    "TrafficModel",
    "bootstrap_length",
    "bootstrap_schedule",
    "canonical_policy",
    "choose_operating_channel",
    "estimation_error",
    "exhaustive_select",
    "generate_matrix",
    "ingest_trace",
    "kernel",
    "measure",
    "n_of_T",
    "parse_trace",
    "posterior",
    "run_exhaustive",
    "run_selective",
    "select_set",
    "solve_spd",
    "sweep",
    "trace_csv_text",
    "weight",
    "write_trace",
    "__version__",
]
