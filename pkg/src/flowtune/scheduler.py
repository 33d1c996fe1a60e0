"""Critical-path scheduler: configures the heaviest path first, then every detour around it."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

from .configurator import PathResult, TunerParams, priority_configuration
from .cost import DEFAULT_PRICING, PricingParams, aggregate_cost
from .errors import DegenerateSubSlo, InfeasibleSlo, WorkflowExecutionFailed
from .graph import (
    MAX_CONFIG,
    Path,
    ResourceConfig,
    SubPath,
    WorkflowDag,
    find_critical_path,
    find_detour_subpaths,
    runtime_sum,
    validate_dag,
)
from .perf import ExecutionBackend, Executor
from .trace import TraceRecord, Tracer

BaseConfig = ResourceConfig
DEFAULT_BASE = MAX_CONFIG


@dataclass
class ScheduleResult:
    configs: dict[str, ResourceConfig]
    trace: list[TraceRecord]
    critical_path: list[str]
    subpaths: list[SubPath]
    base_makespan: float
    degenerate: list[SubPath] = field(default_factory=list)
    path_results: list[PathResult] = field(default_factory=list)

    @property
    def samples(self) -> int:
        return len(self.trace)


def _interval_left(critical_path: Path, sp: SubPath, scheduled_runtimes: Mapping[str, float]) -> float:
    budget = runtime_sum(critical_path, sp.start, sp.end)
    for nid in sp.interior:
        if nid in scheduled_runtimes:
            budget -= scheduled_runtimes[nid]
    return budget


def compute_sub_slo(critical_path: Path, sp: SubPath, scheduled_runtimes: Mapping[str, float]) -> float:
    """Budget left for the unscheduled interior of ``sp``.

    ``scheduled_runtimes`` holds runtimes of interior nodes that were already
    configured elsewhere. Negative budgets are clamped to zero with a
    :class:`DegenerateSubSlo` warning.
    """
    budget = _interval_left(critical_path, sp, scheduled_runtimes)
    if budget < 0:
        warnings.warn(f"sub-path {sp.start}->{sp.end} via {sp.interior} has no slack", DegenerateSubSlo)
        return 0.0
    return budget


def _slack(dag: WorkflowDag, cp: Path, sp: SubPath) -> float:
    used = 0.0
    for nid in sp.interior:
        used += dag.nodes[nid].last_runtime
    return runtime_sum(cp, sp.start, sp.end) - used


def _share(budget: int, nodes: int, unscheduled: int) -> int:
    """Samples granted to a path of ``nodes`` functions; unused ones roll over."""
    return max(1, math.ceil(budget * nodes / unscheduled)) if budget > 0 else 0


def schedule(
    dag: WorkflowDag,
    slo: float | None = None,
    backend: ExecutionBackend | None = None,
    pricing: PricingParams | None = None,
    params: TunerParams | None = None,
    *,
    seed: int = 0,
    base_config: ResourceConfig = DEFAULT_BASE,
    label: str | None = None,
) -> ScheduleResult:
    """Configure every function of ``dag`` for minimum cost under ``slo``.

    The whole workflow runs once at ``base_config`` to weight the nodes;
    that run counts against ``params.max_trail`` like every later sample.
    The remaining budget is split among paths in proportion to how many
    unconfigured functions each one holds. Detours are configured
    least-slack first, so a function shared by several detours is sized
    against the tightest of them.
    """
    validate_dag(dag)
    slo = dag.slo if slo is None else float(slo)
    pricing = pricing or dag.pricing or DEFAULT_PRICING
    params = params or TunerParams()
    executor = Executor(backend, seed)
    tracer = Tracer("aarc")

    for node in dag.nodes.values():
        node.config = base_config
        node.scheduled = False
        node.last_runtime = None
    try:
        makespan = executor.execute_workflow(dag)
    except WorkflowExecutionFailed as exc:
        cost = aggregate_cost(((rt, dag.nodes[n].config) for n, rt in exc.runtimes.items()), pricing)
        tracer.record_workflow("joint", dag.configs(), sum(exc.runtimes.values()), cost, False)
        raise
    cost = aggregate_cost(((n.last_runtime, n.config) for n in dag.nodes.values()), pricing)
    tracer.record_workflow("joint", dag.configs(), makespan, cost, True)
    if makespan > slo:
        raise InfeasibleSlo(makespan, slo, label)
    budget = params.max_trail - 1

    cp = find_critical_path(dag)
    results = []
    share = _share(budget, len(cp.nodes), len(dag.nodes))
    res = priority_configuration(dag, cp.node_ids, slo, executor, pricing, params, tracer, limit=share)
    results.append(res)
    budget -= res.samples
    for n in cp.nodes:
        n.scheduled = True
    frozen = {n.id: n.config for n in cp.nodes}

    subpaths = find_detour_subpaths(dag, cp)
    degenerate: list[SubPath] = []
    pending = list(subpaths)
    while True:
        pending = [sp for sp in pending if any(not dag.nodes[n].scheduled for n in sp.interior)]
        if not pending:
            break
        sp = min(pending, key=lambda p: _slack(dag, cp, p))
        done = {n: dag.nodes[n].last_runtime for n in sp.interior if dag.nodes[n].scheduled}
        remaining = [n for n in sp.interior if not dag.nodes[n].scheduled]
        left = _interval_left(cp, sp, done)
        sp.sub_slo = compute_sub_slo(cp, sp, done)
        if left < 0:
            degenerate.append(sp)
        elif budget > 0:
            unscheduled = sum(1 for n in dag.nodes.values() if not n.scheduled)
            share = _share(budget, len(remaining), unscheduled)
            res = priority_configuration(dag, remaining, sp.sub_slo, executor, pricing, params, tracer, limit=share)
            results.append(res)
            budget -= res.samples
        for n in remaining:
            dag.nodes[n].scheduled = True

    assert all(dag.nodes[n].config == c for n, c in frozen.items()), "critical path changed"
    return ScheduleResult(
        configs=dag.configs(),
        trace=list(tracer.records),
        critical_path=cp.node_ids,
        subpaths=subpaths,
        base_makespan=makespan,
        degenerate=degenerate,
        path_results=results,
    )
