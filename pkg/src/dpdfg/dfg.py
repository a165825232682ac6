"""Directly-follows graph construction and edge aggregation.

Edges keep the full list of per-occurrence time differences so that risk
calibration can inspect the duration distribution, not just the aggregate.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .eventlog import NS_PER_UNIT, START_END, EventLog

UNITS_LARGEST_FIRST = ("d", "h", "min", "s", "ms", "us", "ns")


class AggregationKind(enum.Enum):
    FREQUENCY = "frequency"
    SUM = "sum"
    MIN = "min"
    MAX = "max"
    AVG = "avg"

    @classmethod
    def parse(cls, text: str) -> "AggregationKind":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown aggregation {text!r}") from None

    @property
    def is_time(self) -> bool:
        return self is not AggregationKind.FREQUENCY


@dataclass(frozen=True)
class DfgEdge:
    source: str
    target: str
    durations: tuple[float, ...]

    @property
    def frequency(self) -> int:
        return len(self.durations)

    @property
    def is_boundary(self) -> bool:
        return self.source == START_END or self.target == START_END


@dataclass(frozen=True)
class Dfg:
    """Activities plus edges keyed by (source, target); durations are in
    ``time_unit``.
    """

    activities: frozenset[str]
    edges: dict[tuple[str, str], DfgEdge]
    time_unit: str = "ns"

    def trace_count(self) -> int:
        return sum(e.frequency for (s, _), e in self.edges.items() if s == START_END)

    def sorted_edges(self) -> list[DfgEdge]:
        return [self.edges[k] for k in sorted(self.edges)]


@dataclass(frozen=True)
class AnnotatedDfg:
    """A DFG together with one released weight per edge."""

    dfg: Dfg
    kind: AggregationKind
    weights: dict[tuple[str, str], float]


def build_dfg(log: EventLog) -> Dfg:
    """Build the DFG of an event log, in nanosecond durations.

    Each consecutive event pair in a trace contributes one occurrence; each
    trace also contributes a zero-duration occurrence to the virtual
    ("--", first) and (last, "--") edges.
    """
    activities: set[str] = set()
    occurrences: dict[tuple[str, str], list[float]] = {}

    def add(src: str, dst: str, duration: float) -> None:
        occurrences.setdefault((src, dst), []).append(duration)

    for case_id in sorted(log.traces):
        trace = log.traces[case_id]
        if not trace.events:
            continue
        add(START_END, trace.events[0].activity, 0.0)
        for prev, cur in zip(trace.events, trace.events[1:]):
            gap = cur.timestamp_ns - prev.timestamp_ns
            if gap < 0:
                raise ValueError(f"trace {case_id!r}: events not sorted by timestamp")
            add(prev.activity, cur.activity, float(gap))
        add(trace.events[-1].activity, START_END, 0.0)
        activities.update(e.activity for e in trace.events)

    edges = {key: DfgEdge(key[0], key[1], tuple(vals)) for key, vals in occurrences.items()}
    return Dfg(frozenset(activities), edges, time_unit="ns")


def aggregate(edge: DfgEdge, kind: AggregationKind) -> float:
    """Evaluate the annotation weight of an edge under one aggregation."""
    if not edge.durations:
        raise ValueError("edge has no occurrences")
    if kind is AggregationKind.FREQUENCY:
        return float(edge.frequency)
    if kind is AggregationKind.SUM:
        return sum(edge.durations)
    if kind is AggregationKind.MIN:
        return min(edge.durations)
    if kind is AggregationKind.MAX:
        return max(edge.durations)
    return sum(edge.durations) / len(edge.durations)


def edge_range(edge: DfgEdge, kind: AggregationKind) -> float:
    """Maximum possible value of the guessed attribute for this edge: the
    largest observed duration for time aggregations, 1 for frequencies.
    """
    if kind is AggregationKind.FREQUENCY:
        return 1.0
    if not edge.durations:
        raise ValueError("edge has no occurrences")
    return max(edge.durations)


def convert_unit(dfg: Dfg, unit: str) -> Dfg:
    """Re-express all durations in ``unit``."""
    if unit not in NS_PER_UNIT:
        raise ValueError(f"unknown time unit {unit!r}")
    src_factor = NS_PER_UNIT[dfg.time_unit]
    dst_factor = NS_PER_UNIT[unit]
    if src_factor == dst_factor:
        return Dfg(dfg.activities, dict(dfg.edges), time_unit=unit)
    edges = {
        key: DfgEdge(e.source, e.target, tuple(d * src_factor / dst_factor for d in e.durations))
        for key, e in dfg.edges.items()
    }
    return Dfg(dfg.activities, edges, time_unit=unit)


def choose_time_unit(dfg: Dfg, kind: AggregationKind) -> str:
    """Pick the largest unit keeping the maximum aggregated edge value in
    [1, 1000]; falls back to the nearest end of the unit scale.
    """
    if not dfg.edges:
        return "h"
    peak_ns = max(
        aggregate(e, kind) * NS_PER_UNIT[dfg.time_unit] for e in dfg.edges.values()
    )
    if peak_ns <= 0:
        return "h"
    for unit in UNITS_LARGEST_FIRST:
        value = peak_ns / NS_PER_UNIT[unit]
        if 1.0 <= value <= 1000.0:
            return unit
    return "d" if peak_ns / NS_PER_UNIT["d"] > 1000.0 else "ns"


def filter_for_disclosure(dfg: Dfg, kind: AggregationKind, include_boundary_time: bool) -> Dfg:
    """Drop virtual start/end edges from time-annotated disclosure unless
    explicitly included; frequency disclosure always keeps them.
    """
    if kind is AggregationKind.FREQUENCY or include_boundary_time:
        return dfg
    edges = {k: e for k, e in dfg.edges.items() if not e.is_boundary}
    return Dfg(dfg.activities, edges, time_unit=dfg.time_unit)
