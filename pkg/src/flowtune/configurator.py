"""Priority-queue configurator for a sequence of functions under a latency budget.

Every function on the path gets one CPU and one memory deallocation op.
Ops are popped highest-priority first: untried ops (priority +inf), then ops
ranked by the cost they last saved, then ops that failed before (priority 0).
A sample that breaks the budget, fails, or does not lower the path cost is
reverted and its op backs off: the step halves (floored at the resource
granularity) and it loses one retry.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

from .cost import DEFAULT_PRICING, PricingParams, aggregate_cost
from .errors import WorkflowExecutionFailed
from .graph import CPU_MIN, MEM_MIN, FunctionNode, ResourceConfig, WorkflowDag, _runtime
from .perf import Executor
from .trace import TraceRecord, Tracer

CPU, MEM = "cpu", "mem"


@dataclass
class ResourceOp:
    func: str
    rtype: str
    step: float
    trail: int


@dataclass(frozen=True)
class TunerParams:
    func_trial: int = 3
    max_trail: int = 100
    step0_cpu: float = 1.0
    step0_mem: int = 1024
    gran_cpu: float = 0.1
    gran_mem: int = 64

    def __post_init__(self):
        if min(self.func_trial, self.max_trail, self.gran_cpu, self.gran_mem) <= 0:
            raise ValueError("tuner parameters must be positive")
        if self.step0_cpu < self.gran_cpu or self.step0_mem < self.gran_mem:
            raise ValueError("initial steps must be at least the granularity")


@dataclass
class PathResult:
    configs: dict[str, ResourceConfig]
    trace: list[TraceRecord]
    samples: int
    final_cost: float | None = None
    accepted_costs: list[float] = field(default_factory=list)


def deallocate(op: ResourceOp, config: ResourceConfig) -> ResourceConfig | None:
    """Config with ``op.step`` less of one resource, or None if it is already at the floor."""
    if op.rtype == CPU:
        if config.cpu <= CPU_MIN + 1e-9:
            return None
        return ResourceConfig(max(CPU_MIN, round(config.cpu - op.step, 9)), config.mem)
    if config.mem <= MEM_MIN:
        return None
    return ResourceConfig(config.cpu, max(MEM_MIN, int(config.mem - op.step)))


def allocate(
    op: ResourceOp, node: FunctionNode, previous: ResourceConfig, params: TunerParams = TunerParams()
) -> tuple[float, int]:
    """Put ``previous`` back on ``node`` and return the backed-off (step, trail)."""
    node.config = previous
    if op.rtype == CPU:
        step = max(params.gran_cpu, op.step / 2)
    else:
        step = max(params.gran_mem, int(op.step // 2))
    return step, op.trail - 1


class _OpQueue:
    """Max-priority queue; equal priorities pop in (node id, resource type) order."""

    def __init__(self):
        self._heap: list[tuple[float, str, str, ResourceOp]] = []

    def push(self, op: ResourceOp, priority: float) -> None:
        heapq.heappush(self._heap, (-priority, op.func, op.rtype, op))

    def pop(self) -> ResourceOp:
        return heapq.heappop(self._heap)[3]

    def __len__(self) -> int:
        return len(self._heap)


def _path_cost(dag: WorkflowDag, runtimes: dict[str, float], pricing: PricingParams) -> float:
    return aggregate_cost(((rt, dag.nodes[nid].config) for nid, rt in runtimes.items()), pricing)


def priority_configuration(
    dag: WorkflowDag,
    node_ids: Sequence[str],
    slo: float,
    executor: Executor,
    pricing: PricingParams = DEFAULT_PRICING,
    params: TunerParams = TunerParams(),
    tracer: Tracer | None = None,
    limit: int | None = None,
) -> PathResult:
    """Shed CPU and memory from the functions in ``node_ids`` while their summed runtime stays within ``slo``.

    The path must already carry measured runtimes for its current configs
    (they set the cost to beat). ``limit`` caps the number of path
    executions and defaults to ``params.max_trail``. Node configs on the DAG
    are updated in place and left at the last accepted state.
    """
    tracer = tracer if tracer is not None else Tracer("aarc")
    limit = params.max_trail if limit is None else limit
    first = len(tracer)
    node_ids = list(node_ids)
    if not node_ids:
        return PathResult({}, [], 0, 0.0)

    best_cost = _path_cost(dag, {nid: _runtime(dag.nodes[nid]) for nid in node_ids}, pricing)
    accepted_costs: list[float] = []
    pq = _OpQueue()
    for nid in node_ids:
        pq.push(ResourceOp(nid, CPU, params.step0_cpu, params.func_trial), math.inf)
        pq.push(ResourceOp(nid, MEM, params.step0_mem, params.func_trial), math.inf)

    count = 0
    while len(pq) > 0 and count < limit:
        op = pq.pop()
        node = dag.nodes[op.func]
        before = node.config
        proposed = deallocate(op, before)
        if proposed is None:
            continue
        count += 1
        saved = {nid: dag.nodes[nid].last_runtime for nid in node_ids}
        node.config = proposed
        failed = False
        try:
            runtime, runtimes = executor.execute_path(dag, node_ids)
        except WorkflowExecutionFailed as exc:
            failed = True
            runtimes = exc.runtimes
            runtime = sum(runtimes.values())
        cost = _path_cost(dag, runtimes, pricing)
        reject = failed or runtime > slo or cost >= best_cost
        tracer.record(
            op.func, op.rtype, proposed.cpu, proposed.mem, runtime, cost, not reject,
            {nid: dag.nodes[nid].config for nid in node_ids},
        )
        if reject:
            op.step, op.trail = allocate(op, node, before, params)
            for nid, rt in saved.items():
                dag.nodes[nid].last_runtime = rt
            if op.trail > 0:
                pq.push(op, 0.0)
        else:
            pq.push(op, best_cost - cost)
            best_cost = cost
            accepted_costs.append(cost)

    return PathResult(
        configs={nid: dag.nodes[nid].config for nid in node_ids},
        trace=tracer.records[first:],
        samples=count,
        final_cost=best_cost,
        accepted_costs=accepted_costs,
    )
