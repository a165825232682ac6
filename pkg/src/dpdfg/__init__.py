"""Differentially private disclosure of directly-follows graphs.

Builds frequency- and time-annotated DFGs from event logs and releases them
under epsilon-differential privacy, calibrated either from a guessing-
advantage risk target (P1) or from a percentage-error utility target (P2).
"""
from .dfg import AggregationKind, AnnotatedDfg, Dfg, DfgEdge, aggregate, build_dfg, edge_range
from .eventlog import (
    CANONICAL_MAPPING,
    ColumnMapping,
    Event,
    EventLog,
    IngestError,
    START_END,
    Trace,
    parse_csv,
    parse_xes,
    to_canonical_csv,
)
from .noise import DEFAULT_SEED, NoiseSpec, NoiseStream, release, sample_laplace, sensitivity
from .pipeline import (
    DisclosureReport,
    DisclosureRequest,
    EdgeDisclosure,
    Mode,
    disclose,
    disclose_p1,
    disclose_p2,
    emit_csv,
    emit_dot,
    emit_json,
    report_to_dict,
)
from .risk import (
    EdgeEpsilon,
    RiskParams,
    UNBOUNDED,
    delta_from_epsilon_freq,
    delta_from_epsilon_time,
    dfg_delta,
    edge_epsilon_time,
    empirical_prior,
    epsilon_freq,
    epsilon_from_delta,
    posterior_bound,
    worst_case_prior,
)
from .utility import UtilityParams, alpha_per_edge, ape, epsilon_from_alpha, mape, smape

__version__ = "0.1.0"
