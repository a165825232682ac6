"""End-to-end disclosure flows.

P1: tolerated guessing advantage -> per-edge epsilon -> noisy DFG -> error
report. P2: tolerated percentage error -> per-edge epsilon -> noisy DFG ->
risk report. Emitters for DOT, JSON and CSV.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .dfg import (
    AggregationKind,
    AnnotatedDfg,
    Dfg,
    DfgEdge,
    START_END,
    aggregate,
    choose_time_unit,
    convert_unit,
    edge_range,
    filter_for_disclosure,
)
from .noise import DEFAULT_SEED, NoiseStream, post_process, sample_laplace, sensitivity
from .risk import (
    UNBOUNDED,
    RiskParams,
    delta_from_epsilon_freq,
    delta_from_epsilon_time,
    edge_epsilon_time,
    empirical_prior,
    epsilon_freq,
    worst_case_delta_time,
)
from .utility import UtilityParams, alpha_per_edge, ape, epsilon_from_alpha

SCHEMA_VERSION = 1


class Mode(enum.Enum):
    P1 = "P1"
    P2 = "P2"


@dataclass(frozen=True)
class DisclosureRequest:
    mode: Mode
    aggregation: AggregationKind
    risk: RiskParams | None = None
    utility: UtilityParams | None = None
    precision: float = 0.5
    seed: int = DEFAULT_SEED
    runs: int = 1
    include_boundary_time: bool = False
    time_unit: str | None = None

    def __post_init__(self) -> None:
        if self.mode is Mode.P1 and (self.risk is None or self.utility is not None):
            raise ValueError("P1 requires risk parameters and no utility parameters")
        if self.mode is Mode.P2 and (self.utility is None or self.risk is not None):
            raise ValueError("P2 requires utility parameters and no risk parameters")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not 0.0 <= self.precision <= 1.0:
            raise ValueError(f"precision must be in [0,1], got {self.precision}")


@dataclass(frozen=True)
class EdgeDisclosure:
    source: str
    target: str
    true_value: float
    epsilon: float
    noise_scale: float
    noisy_value: float
    released_value: float
    ape: float | None
    released_ape: float | None
    edge_delta: float
    degenerate: bool = False
    boundary_constant: bool = False


@dataclass
class DisclosureReport:
    mode: str
    aggregation: str
    parameters: dict
    time_unit: str | None
    edges: list[EdgeDisclosure]
    mape: float
    smape: float
    median_epsilon: float
    overall_delta: float
    seed: int
    runs: int
    run_mapes: list[float] = field(default_factory=list)
    run_smapes: list[float] = field(default_factory=list)
    runtime_ms: float = field(default=0.0, compare=False)

    def epsilons(self) -> list[float]:
        return [e.epsilon for e in self.edges]


def _effective_range(edge: DfgEdge, kind: AggregationKind) -> float:
    r = edge_range(edge, kind)
    return r if r > 0.0 else 1.0


def _is_constant_boundary(edge: DfgEdge, kind: AggregationKind) -> bool:
    # Virtual-edge time annotations are 0 by construction: data-independent,
    # released exactly.
    return kind.is_time and edge.is_boundary


@dataclass(frozen=True)
class _Calibration:
    epsilon: float
    noise_scale: float
    edge_delta: float
    degenerate: bool
    boundary_constant: bool


def _calibrate_p1(edge: DfgEdge, kind: AggregationKind, risk: RiskParams) -> _Calibration:
    if _is_constant_boundary(edge, kind):
        return _Calibration(UNBOUNDED, 0.0, 0.0, False, True)
    if kind is AggregationKind.FREQUENCY:
        eps = epsilon_freq(risk.delta)
        return _Calibration(eps, sensitivity(kind, edge.frequency) / eps, delta_from_epsilon_freq(eps), False, False)
    result = edge_epsilon_time(edge, risk, kind)
    r = _effective_range(edge, kind)
    edge_delta = max(
        delta_from_epsilon_time(prior, result.epsilon, r) if prior < 1.0 else 0.0
        for prior in result.priors
    )
    scale = 0.0 if result.epsilon == UNBOUNDED else sensitivity(kind, edge.frequency) / result.epsilon
    return _Calibration(result.epsilon, scale, edge_delta, result.degenerate, False)


def _calibrate_p2(edge: DfgEdge, kind: AggregationKind, utility: UtilityParams, precision: float) -> _Calibration:
    if _is_constant_boundary(edge, kind):
        return _Calibration(UNBOUNDED, 0.0, 0.0, False, True)
    true_value = aggregate(edge, kind)
    alpha = alpha_per_edge(true_value, utility.mape_target)
    sens = sensitivity(kind, edge.frequency)
    eps = epsilon_from_alpha(sens, alpha, utility.beta)
    if kind is AggregationKind.FREQUENCY:
        return _Calibration(eps, sens / eps, delta_from_epsilon_freq(eps), False, False)
    r = _effective_range(edge, kind)
    if edge.frequency == 1 or edge_range(edge, kind) <= 0.0:
        return _Calibration(eps, sens / eps, worst_case_delta_time(eps, r), True, False)
    edge_delta = 0.0
    for t in edge.durations:
        prior = empirical_prior(edge.durations, t, precision, edge_range(edge, kind))
        if prior < 1.0:
            edge_delta = max(edge_delta, delta_from_epsilon_time(prior, eps, r))
    return _Calibration(eps, sens / eps, edge_delta, False, False)


def _disclose_edge(edge: DfgEdge, kind: AggregationKind, cal: _Calibration, request: DisclosureRequest):
    true_value = aggregate(edge, kind)
    noisy_values = []
    for run in range(request.runs):
        stream = NoiseStream(request.seed, edge.source, edge.target, run)
        noisy_values.append(true_value + sample_laplace(cal.noise_scale, stream))
    released = [post_process(v, kind) if not cal.boundary_constant else true_value for v in noisy_values]
    if cal.boundary_constant:
        apes = [None] * request.runs
        released_apes = [None] * request.runs
    else:
        apes = [ape(true_value, v) for v in noisy_values]
        released_apes = [ape(true_value, v) for v in released]
    disclosure = EdgeDisclosure(
        source=edge.source,
        target=edge.target,
        true_value=true_value,
        epsilon=cal.epsilon,
        noise_scale=cal.noise_scale,
        noisy_value=noisy_values[0],
        released_value=released[0],
        ape=apes[0],
        released_ape=released_apes[0],
        edge_delta=cal.edge_delta,
        degenerate=cal.degenerate,
        boundary_constant=cal.boundary_constant,
    )
    return disclosure, noisy_values, released, apes


def _disclose(dfg: Dfg, request: DisclosureRequest, threads: int = 1) -> tuple[AnnotatedDfg, DisclosureReport]:
    started = time.perf_counter()
    working = filter_for_disclosure(dfg, request.aggregation, request.include_boundary_time)
    if not working.edges:
        raise ValueError("cannot disclose an empty DFG")
    if request.aggregation.is_time:
        unit = request.time_unit or choose_time_unit(working, request.aggregation)
        working = convert_unit(working, unit)
    else:
        unit = None

    kind = request.aggregation
    edges = working.sorted_edges()

    def per_edge(edge: DfgEdge):
        if request.mode is Mode.P1:
            cal = _calibrate_p1(edge, kind, request.risk)
        else:
            cal = _calibrate_p2(edge, kind, request.utility, request.precision)
        return _disclose_edge(edge, kind, cal, request)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(per_edge, edges))
    else:
        results = [per_edge(e) for e in edges]

    disclosures = [r[0] for r in results]
    run_mapes, run_smapes = [], []
    for run in range(request.runs):
        ape_values = [apes[run] for _, _, _, apes in results if apes[run] is not None]
        run_mapes.append(sum(ape_values) / len(ape_values) if ape_values else 0.0)
        pairs = [
            (d.true_value, rel[run])
            for d, _, rel, _ in results
            if not d.boundary_constant
        ]
        run_smapes.append(
            sum(abs(a - f) / abs(a + f) for a, f in pairs) / len(pairs) if pairs else 0.0
        )

    weights = {(d.source, d.target): d.released_value for d in disclosures}
    annotated = AnnotatedDfg(
        Dfg(dfg.activities, dict(working.edges), time_unit=working.time_unit), kind, weights
    )
    report = DisclosureReport(
        mode=request.mode.value,
        aggregation=kind.value,
        parameters=_echo_parameters(request),
        time_unit=unit,
        edges=disclosures,
        mape=sum(run_mapes) / len(run_mapes),
        smape=sum(run_smapes) / len(run_smapes),
        median_epsilon=statistics.median(d.epsilon for d in disclosures),
        overall_delta=max(d.edge_delta for d in disclosures),
        seed=request.seed,
        runs=request.runs,
        run_mapes=run_mapes,
        run_smapes=run_smapes,
        runtime_ms=(time.perf_counter() - started) * 1e3,
    )
    return annotated, report


def _echo_parameters(request: DisclosureRequest) -> dict:
    params: dict = {
        "precision": request.precision,
        "include_boundary_time": request.include_boundary_time,
        "time_unit_override": request.time_unit,
    }
    if request.risk is not None:
        params["delta"] = request.risk.delta
        params["precision"] = request.risk.precision
    if request.utility is not None:
        params["mape_target"] = request.utility.mape_target
        params["beta"] = request.utility.beta
    return params


def disclose_p1(dfg: Dfg, request: DisclosureRequest, threads: int = 1) -> tuple[AnnotatedDfg, DisclosureReport]:
    """Risk-first disclosure: calibrate epsilon from the guessing-advantage
    target, then report the realized utility loss.
    """
    if request.mode is not Mode.P1:
        raise ValueError("request mode must be P1")
    return _disclose(dfg, request, threads)


def disclose_p2(dfg: Dfg, request: DisclosureRequest, threads: int = 1) -> tuple[AnnotatedDfg, DisclosureReport]:
    """Utility-first disclosure: calibrate epsilon from the error target,
    then report the incurred guessing advantage.
    """
    if request.mode is not Mode.P2:
        raise ValueError("request mode must be P2")
    return _disclose(dfg, request, threads)


def disclose(dfg: Dfg, request: DisclosureRequest, threads: int = 1) -> tuple[AnnotatedDfg, DisclosureReport]:
    if request.mode is Mode.P1:
        return disclose_p1(dfg, request, threads)
    return disclose_p2(dfg, request, threads)


def _num(value: float):
    return "unbounded" if value == UNBOUNDED else value


def report_to_dict(report: DisclosureReport) -> dict:
    """JSON-ready view of a report. Wall-clock time is deliberately excluded
    so identical seeded runs serialize byte-identically.
    """
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": report.mode,
        "aggregation": report.aggregation,
        "parameters": report.parameters,
        "time_unit": report.time_unit,
        "seed": report.seed,
        "runs": report.runs,
        "median_epsilon": _num(report.median_epsilon),
        "overall_delta": report.overall_delta,
        "mape": report.mape,
        "smape": report.smape,
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "true_value": e.true_value,
                "epsilon": _num(e.epsilon),
                "noise_scale": e.noise_scale,
                "noisy_value": e.noisy_value,
                "released_value": e.released_value,
                "ape": e.ape,
                "released_ape": e.released_ape,
                "edge_delta": e.edge_delta,
                "degenerate": e.degenerate,
                "boundary_constant": e.boundary_constant,
            }
            for e in report.edges
        ],
    }


def emit_json(report: DisclosureReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def emit_csv(report: DisclosureReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["source", "target", "true", "epsilon", "released", "ape", "delta"])
    for e in report.edges:
        writer.writerow(
            [
                e.source,
                e.target,
                repr(e.true_value),
                "unbounded" if e.epsilon == UNBOUNDED else repr(e.epsilon),
                repr(e.released_value),
                "" if e.ape is None else repr(e.ape),
                repr(e.edge_delta),
            ]
        )
    return out.getvalue()


def _dot_quote(label) -> str:
    text = str(label)
    text = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return '"' + text + '"'


def _format_weight(value: float, kind: AggregationKind) -> str:
    if kind is AggregationKind.FREQUENCY:
        return str(int(value))
    return f"{value:.6g}"


def emit_dot(annotated: AnnotatedDfg, report: DisclosureReport | None = None, annotate_debug: bool = False) -> str:
    """DOT rendering of a released DFG; every activity node is kept even if
    it has no disclosed edges.
    """
    kind = annotated.kind
    by_key = {(e.source, e.target): e for e in report.edges} if report else {}
    lines = ["digraph dfg {"]
    for node in sorted(annotated.dfg.activities | {START_END}):
        lines.append(f"    {_dot_quote(node)};")
    for key in sorted(annotated.weights):
        label = _format_weight(annotated.weights[key], kind)
        if annotate_debug and key in by_key:
            e = by_key[key]
            eps_text = "unbounded" if e.epsilon == UNBOUNDED else f"{e.epsilon:.6g}"
            ape_text = "n/a" if e.ape is None else f"{e.ape:.6g}"
            label = f"{label}\neps={eps_text}\nape={ape_text}"
        lines.append(f"    {_dot_quote(key[0])} -> {_dot_quote(key[1])} [label={_dot_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
