"""Experiment runner, configuration evaluation and the input-aware configuration engine."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .baselines import BoParams, MaffParams, bo_optimize, maff_optimize
from .configurator import TunerParams
from .cost import DEFAULT_PRICING, PricingParams, aggregate_cost
from .errors import FlowtuneError, UnknownClass, WorkflowExecutionFailed
from .graph import ResourceConfig, WorkflowDag
from .perf import ExecutionBackend, Executor, derive_seed
from .scheduler import schedule
from .templates import scale_workflow
from .trace import TraceRecord, summarize, write_trace

log = logging.getLogger(__name__)

METHODS = ("aarc", "bo", "maff")


@dataclass
class Evaluation:
    mean_runtime: float
    std_runtime: float
    mean_cost: float
    violation_rate: float
    runs: int
    failures: int = 0

    def to_dict(self) -> dict[str, float | int]:
        return dict(vars(self))


def evaluate_config(
    dag: WorkflowDag,
    configs: Mapping[str, ResourceConfig],
    runs: int = 100,
    seed: int = 0,
    backend: ExecutionBackend | None = None,
    pricing: PricingParams | None = None,
    slo: float | None = None,
) -> Evaluation:
    """Run the workflow ``runs`` times under ``configs`` and summarize.

    Failed runs (OOM) count as SLO violations and are left out of the
    runtime and cost statistics.
    """
    missing = set(dag.nodes) - set(configs)
    if missing:
        raise ValueError(f"config does not cover nodes {sorted(missing)}")
    slo = dag.slo if slo is None else slo
    pricing = pricing or dag.pricing or DEFAULT_PRICING
    work = dag.copy()
    work.apply_configs(configs)
    spans, costs = [], []
    violations = failures = 0
    for r in range(runs):
        executor = Executor(backend, derive_seed(seed, "eval", r))
        try:
            span = executor.execute_workflow(work)
        except WorkflowExecutionFailed:
            failures += 1
            violations += 1
            continue
        spans.append(span)
        costs.append(aggregate_cost(((n.last_runtime, n.config) for n in work.nodes.values()), pricing))
        violations += span > slo
    spans_a = np.array(spans) if spans else np.array([np.nan])
    return Evaluation(
        mean_runtime=float(spans_a.mean()),
        std_runtime=float(spans_a.std()) if spans else float("nan"),
        mean_cost=float(np.mean(costs)) if costs else float("nan"),
        violation_rate=violations / runs if runs else 0.0,
        runs=runs,
        failures=failures,
    )


@dataclass
class MethodParams:
    tuner: TunerParams = field(default_factory=TunerParams)
    bo: BoParams = field(default_factory=BoParams)
    maff: MaffParams = field(default_factory=MaffParams)
    pricing: PricingParams | None = None


def optimize(
    dag: WorkflowDag,
    method: str,
    slo: float | None = None,
    seed: int = 0,
    params: MethodParams | None = None,
    backend: ExecutionBackend | None = None,
):
    """Run one search method; returns an object with ``configs`` and ``trace``."""
    params = params or MethodParams()
    if method == "aarc":
        return schedule(dag, slo, backend, params.pricing, params.tuner, seed=seed)
    if method == "bo":
        return bo_optimize(dag, slo, backend, params.pricing, params.bo, seed=seed)
    if method == "maff":
        return maff_optimize(dag, slo, backend, params.pricing, params.maff, seed=seed)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


@dataclass
class RunReport:
    method: str
    seed: int
    ok: bool
    trace: list[TraceRecord] = field(default_factory=list)
    configs: dict[str, ResourceConfig] = field(default_factory=dict)
    totals: dict[str, float | int] = field(default_factory=dict)
    evaluation: Evaluation | None = None
    error: str | None = None

    @property
    def allocated_mem(self) -> int:
        return sum(c.mem for c in self.configs.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "seed": self.seed,
            "ok": self.ok,
            "error": self.error,
            **self.totals,
            "allocated_mem_mb": self.allocated_mem,
            "allocated_cpu": round(sum(c.cpu for c in self.configs.values()), 9),
            "evaluation": self.evaluation.to_dict() if self.evaluation else None,
            "configs": {nid: c.to_dict() for nid, c in sorted(self.configs.items())},
        }


def run_experiment(
    workloads: Callable | WorkflowDag,
    methods: Sequence[str],
    seeds: Iterable[int],
    params: MethodParams | None = None,
    eval_runs: int = 100,
    backend: ExecutionBackend | None = None,
    trace_dir: str | Path | None = None,
    slo: float | None = None,
) -> list[RunReport]:
    """Run every (method, seed) pair and evaluate the configuration it finds.

    ``workloads`` is either a fixed workflow or a callable ``seed -> dag``
    so template experiments get a fresh instance per seed. A failing run is
    reported with ``ok=False`` instead of aborting the batch.
    """
    reports = []
    for seed in seeds:
        for method in methods:
            dag = workloads(seed) if callable(workloads) else workloads.copy()
            try:
                res = optimize(dag, method, slo, seed, params, backend)
            except FlowtuneError as exc:
                log.warning("%s seed %s failed: %s", method, seed, exc)
                reports.append(RunReport(method, seed, False, error=f"{type(exc).__name__}: {exc}"))
                continue
            ev = None
            if eval_runs:
                pricing = params.pricing if params else None
                ev = evaluate_config(dag, res.configs, eval_runs, seed, backend, pricing, slo)
            rep = RunReport(method, seed, True, res.trace, dict(res.configs), summarize(res.trace), ev)
            if trace_dir is not None:
                Path(trace_dir).mkdir(parents=True, exist_ok=True)
                write_trace(res.trace, Path(trace_dir) / f"trace_{method}_seed{seed}.csv")
            reports.append(rep)
    return reports


def summary_table(reports: Sequence[RunReport]) -> list[dict[str, Any]]:
    """Per-method medians over successful runs."""
    rows = []
    for method in dict.fromkeys(r.method for r in reports):
        ok = [r for r in reports if r.method == method and r.ok]
        row: dict[str, Any] = {"method": method, "runs": len(ok), "failed": sum(1 for r in reports if r.method == method and not r.ok)}
        if ok:
            for key in ("samples", "sampling_time_s", "sampling_cost"):
                row[f"median_{key}"] = float(np.median([r.totals[key] for r in ok]))
            row["median_allocated_mem_mb"] = float(np.median([r.allocated_mem for r in ok]))
            evs = [r.evaluation for r in ok if r.evaluation]
            if evs:
                row["median_cost"] = float(np.median([e.mean_cost for e in evs]))
                row["median_runtime"] = float(np.median([e.mean_runtime for e in evs]))
                row["max_violation_rate"] = float(max(e.violation_rate for e in evs))
        rows.append(row)
    return rows


# -- input-aware engine ---------------------------------------------------------


@dataclass(frozen=True)
class InputClass:
    label: str
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("input scale must be positive")


def parse_classes(text: str) -> list[InputClass]:
    """Parse ``light:0.3,middle:1.0,heavy:3.0``."""
    out = []
    for part in text.split(","):
        label, _, scale = part.strip().partition(":")
        out.append(InputClass(label, float(scale)))
    return out


def input_aware_optimize(
    dag: WorkflowDag,
    classes: Sequence[InputClass],
    slo: float | None = None,
    tuner: TunerParams | None = None,
    backend: ExecutionBackend | None = None,
    pricing: PricingParams | None = None,
    seed: int = 0,
) -> dict[str, dict[str, ResourceConfig]]:
    """Schedule one scaled copy of ``dag`` per input class.

    An infeasible class raises :class:`InfeasibleSlo` carrying its label.
    """
    if not classes:
        raise ValueError("need at least one input class")
    table = {}
    for c in classes:
        scaled = scale_workflow(dag, c.scale)
        res = schedule(scaled, slo, backend, pricing, tuner, seed=seed, label=c.label)
        table[c.label] = res.configs
    return table


def dispatch(label: str, table: Mapping[str, dict[str, ResourceConfig]]) -> dict[str, ResourceConfig]:
    try:
        return table[label]
    except KeyError:
        raise UnknownClass(label) from None
