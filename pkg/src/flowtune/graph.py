"""Workflow DAG, resource configurations and the path algorithms used by the scheduler."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .errors import (
    CycleDetected,
    DanglingEdge,
    DuplicateNodeId,
    MissingRuntime,
    MultipleSinks,
    MultipleSources,
    NodeNotOnPath,
    ValidationError,
)

CPU_MIN, CPU_MAX = 0.1, 10.0
MEM_MIN, MEM_MAX = 128, 10240


@dataclass(frozen=True)
class ResourceConfig:
    """Decoupled allocation for one function: vCPUs and memory in MB."""

    cpu: float
    mem: int

    def in_bounds(self) -> bool:
        eps = 1e-9
        return (CPU_MIN - eps <= self.cpu <= CPU_MAX + eps) and (MEM_MIN <= self.mem <= MEM_MAX)

    def to_dict(self) -> dict[str, float | int]:
        return {"cpu": self.cpu, "mem": self.mem}


MAX_CONFIG = ResourceConfig(CPU_MAX, MEM_MAX)


@dataclass
class FunctionNode:
    id: str
    profile_ref: str
    config: ResourceConfig = MAX_CONFIG
    last_runtime: float | None = None
    scheduled: bool = False


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str


class WorkflowDag:
    """A workflow of functions with dependency edges and an end-to-end SLO.

    ``profiles`` maps profile names to perf profiles and ``pricing`` is an
    optional pricing override loaded from a workflow file; the graph itself
    never interprets either.
    """

    def __init__(
        self,
        nodes: Iterable[FunctionNode],
        edges: Iterable[Edge | tuple[str, str]],
        slo: float,
        profiles: dict[str, Any] | None = None,
        pricing: Any = None,
    ):
        self.node_list: list[FunctionNode] = list(nodes)
        self.nodes: dict[str, FunctionNode] = {}
        for n in self.node_list:
            self.nodes.setdefault(n.id, n)
        self.edges: list[Edge] = [e if isinstance(e, Edge) else Edge(*e) for e in edges]
        self.slo = float(slo)
        self.profiles: dict[str, Any] = dict(profiles or {})
        self.pricing = pricing
        self._succ: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        self._pred: dict[str, list[str]] = {nid: [] for nid in self.nodes}
        for e in self.edges:
            if e.src in self._succ and e.dst in self._pred:
                self._succ[e.src].append(e.dst)
                self._pred[e.dst].append(e.src)
        for adj in (self._succ, self._pred):
            for nid in adj:
                adj[nid] = sorted(set(adj[nid]))

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self.nodes

    def successors(self, node_id: str) -> list[str]:
        return self._succ[node_id]

    def predecessors(self, node_id: str) -> list[str]:
        return self._pred[node_id]

    def sources(self) -> list[str]:
        return sorted(n for n, p in self._pred.items() if not p)

    def sinks(self) -> list[str]:
        return sorted(n for n, s in self._succ.items() if not s)

    @property
    def source(self) -> str:
        return self.sources()[0]

    @property
    def sink(self) -> str:
        return self.sinks()[0]

    def configs(self) -> dict[str, ResourceConfig]:
        return {nid: n.config for nid, n in self.nodes.items()}

    def apply_configs(self, configs: dict[str, ResourceConfig]) -> None:
        for nid, cfg in configs.items():
            self.nodes[nid].config = cfg

    def profile_of(self, node_id: str) -> Any:
        return self.profiles[self.nodes[node_id].profile_ref]

    def copy(self) -> WorkflowDag:
        nodes = [
            FunctionNode(n.id, n.profile_ref, n.config, n.last_runtime, n.scheduled)
            for n in self.node_list
        ]
        return WorkflowDag(nodes, list(self.edges), self.slo, dict(self.profiles), self.pricing)


@dataclass(frozen=True)
class SloSpec:
    end_to_end_seconds: float

    def __post_init__(self):
        if not self.end_to_end_seconds > 0:
            raise ValueError("SLO must be strictly positive")


@dataclass(frozen=True)
class Path:
    """An ordered sequence of nodes; runtimes are read live from the nodes."""

    nodes: tuple[FunctionNode, ...]

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    @property
    def total_runtime(self) -> float:
        total = 0.0
        for n in self.nodes:
            total += _runtime(n)
        return total

    def index(self, node_id: str) -> int:
        for i, n in enumerate(self.nodes):
            if n.id == node_id:
                return i
        raise NodeNotOnPath(node_id)

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class SubPath:
    start: str
    end: str
    interior: list[str]
    sub_slo: float | None = field(default=None, compare=False)


def _runtime(node: FunctionNode) -> float:
    if node.last_runtime is None:
        raise MissingRuntime(f"node {node.id!r} has not been executed")
    return node.last_runtime


def topological_order(dag: WorkflowDag) -> list[str]:
    """Kahn's algorithm, smallest ready id first so the order is deterministic."""
    indeg = {nid: len(dag.predecessors(nid)) for nid in dag.nodes}
    ready = [nid for nid, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for s in dag.successors(nid):
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(ready, s)
    if len(order) != len(dag.nodes):
        stuck = sorted(nid for nid, d in indeg.items() if d > 0)
        raise CycleDetected(f"cycle through nodes {stuck}")
    return order


def validate_dag(dag: WorkflowDag) -> None:
    """Raise the first violated structural invariant; return None if the DAG is valid."""
    seen: set[str] = set()
    for n in dag.node_list:
        if n.id in seen:
            raise DuplicateNodeId(f"duplicate node id {n.id!r}")
        seen.add(n.id)
    for e in dag.edges:
        if e.src not in dag.nodes or e.dst not in dag.nodes:
            raise DanglingEdge(f"edge {e.src} -> {e.dst} names an unknown node")
        if e.src == e.dst:
            raise CycleDetected(f"self-loop on {e.src}")
    if not dag.nodes:
        raise ValidationError("workflow has no nodes")
    topological_order(dag)
    if len(dag.sources()) > 1:
        raise MultipleSources(f"several sources: {', '.join(dag.sources())}")
    if len(dag.sinks()) > 1:
        raise MultipleSinks(f"several sinks: {', '.join(dag.sinks())}")
    if not dag.slo > 0:
        raise ValidationError("SLO must be strictly positive")


def find_critical_path(dag: WorkflowDag) -> Path:
    """Heaviest source-to-sink path by node runtime.

    Forward DP in topological order. Among equally heavy paths the
    lexicographically smallest id sequence wins; two sequences ending at the
    same node are never prefixes of one another, so the order between them
    survives any common extension.
    """
    order = topological_order(dag)
    for nid in order:
        _runtime(dag.nodes[nid])
    best: dict[str, tuple[float, tuple[str, ...]]] = {}
    for nid in order:
        w = dag.nodes[nid].last_runtime
        preds = dag.predecessors(nid)
        if not preds:
            best[nid] = (w, (nid,))
            continue
        cand = None
        for p in preds:
            pw, pseq = best[p]
            seq = pseq + (nid,)
            if cand is None or pw > cand[0] or (pw == cand[0] and seq < cand[1]):
                cand = (pw, seq)
        best[nid] = (cand[0] + w, cand[1])
    ends = [best[s] for s in dag.sinks()]
    top = max(w for w, _ in ends)
    seq = min(s for w, s in ends if w == top)
    return Path(tuple(dag.nodes[nid] for nid in seq))


def find_detour_subpaths(dag: WorkflowDag, critical_path: Path) -> list[SubPath]:
    """Every maximal excursion that leaves the critical path and rejoins it later."""
    pos = {nid: i for i, nid in enumerate(critical_path.node_ids)}
    found: list[tuple[int, tuple[str, ...], int, SubPath]] = []

    def walk(start: str, trail: list[str]) -> None:
        for s in dag.successors(trail[-1]):
            if s in pos:
                found.append((pos[start], tuple(trail), pos[s], SubPath(start, s, list(trail))))
            else:
                trail.append(s)
                walk(start, trail)
                trail.pop()

    for c in critical_path.node_ids:
        for s in dag.successors(c):
            if s not in pos:
                walk(c, [s])
    found.sort(key=lambda t: t[:3])
    return [t[3] for t in found]


def runtime_sum(path: Path, start: str, end: str) -> float:
    """Total runtime of the nodes strictly between ``start`` and ``end`` on ``path``."""
    i, j = path.index(start), path.index(end)
    if i > j:
        raise ValueError(f"{start!r} comes after {end!r} on the path")
    total = 0.0
    for n in path.nodes[i + 1 : j]:
        total += _runtime(n)
    return total


def path_of(dag: WorkflowDag, node_ids: Sequence[str]) -> Path:
    return Path(tuple(dag.nodes[nid] for nid in node_ids))
