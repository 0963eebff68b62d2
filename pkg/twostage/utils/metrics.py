"""Prometheus instrumentation helpers for simulation runs."""

from __future__ import annotations

from pathlib import Path

from prometheus_client import REGISTRY, Counter, Histogram, write_to_textfile

REPLICATION_COUNTER = Counter(
    "twostage_replications_total",
    "Two-stage replications simulated",
    ("scheme",),
)

TESTS_COUNTER = Counter(
    "twostage_tests_total",
    "Tests spent by simulated replications",
    ("scheme", "stage"),
)

ORACLE_STATES_COUNTER = Counter(
    "twostage_oracle_states_total",
    "(design, infection) pairs visited by exhaustive enumeration",
    ("scheme",),
)

AXIS_POINT_LATENCY = Histogram(
    "twostage_axis_point_seconds",
    "Wall time spent on one sweep axis point for one scheme",
    ("command", "scheme"),
    buckets=(0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0),
)


def record_replications(scheme: str, reps: int, stage1_tests: int, stage2_tests: int) -> None:
    """Count a finished batch of replications and the tests it used."""

    REPLICATION_COUNTER.labels(scheme=scheme).inc(reps)
    TESTS_COUNTER.labels(scheme=scheme, stage="screening").inc(stage1_tests)
    TESTS_COUNTER.labels(scheme=scheme, stage="confirmation").inc(stage2_tests)


def record_oracle_states(scheme: str, states: int) -> None:
    ORACLE_STATES_COUNTER.labels(scheme=scheme).inc(states)


def observe_axis_point(command: str, scheme: str, duration_s: float) -> None:
    AXIS_POINT_LATENCY.labels(command=command, scheme=scheme).observe(duration_s)


def write_metrics(path: str | Path) -> None:
    """Write the default registry in Prometheus text exposition format."""

    write_to_textfile(str(path), REGISTRY)


__all__ = [
    "AXIS_POINT_LATENCY",
    "ORACLE_STATES_COUNTER",
    "REPLICATION_COUNTER",
    "TESTS_COUNTER",
    "observe_axis_point",
    "record_oracle_states",
    "record_replications",
    "write_metrics",
]
