"""Comparison methods: Bayesian optimization over the decoupled grid and MAFF coupled descent."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .cost import DEFAULT_PRICING, PricingParams, aggregate_cost
from .errors import WorkflowExecutionFailed
from .graph import CPU_MAX, CPU_MIN, MEM_MAX, MEM_MIN, ResourceConfig, WorkflowDag, validate_dag
from .perf import ExecutionBackend, Executor, makespan_of
from .trace import TraceRecord, Tracer

CPU_GRID = [(i + 1) / 10 for i in range(100)]  # 0.1 .. 10.0 vCPU
MEM_GRID = list(range(MEM_MIN, MEM_MAX + 1, 64))  # 128 .. 10240 MB


@dataclass
class SearchResult:
    configs: dict[str, ResourceConfig]
    trace: list[TraceRecord]
    best_cost: float
    feasible: bool = True
    info: dict = field(default_factory=dict)

    @property
    def samples(self) -> int:
        return len(self.trace)


@dataclass
class _Sample:
    makespan: float
    cost: float
    ok: bool
    failed: bool = False


def _measure(dag: WorkflowDag, executor: Executor, pricing: PricingParams, slo: float) -> _Sample:
    try:
        makespan = executor.execute_workflow(dag)
    except WorkflowExecutionFailed as exc:
        cost = aggregate_cost(((rt, dag.nodes[n].config) for n, rt in exc.runtimes.items()), pricing)
        return _Sample(makespan_of(dag, exc.runtimes), cost, False, True)
    cost = aggregate_cost(((n.last_runtime, n.config) for n in dag.nodes.values()), pricing)
    return _Sample(makespan, cost, makespan <= slo)


# -- Bayesian optimization ---------------------------------------------------


@dataclass(frozen=True)
class BoParams:
    budget: int = 100
    init_random: int = 10
    n_candidates: int = 1000
    lengthscale: float = 0.2
    noise_ratio: float = 1e-4  # observation noise as a fraction of the observed cost variance
    slo_penalty: float = 1e4

    def __post_init__(self):
        if self.budget < self.init_random or self.init_random < 1:
            raise ValueError("need budget >= init_random >= 1")


def _se_kernel(a: np.ndarray, b: np.ndarray, lengthscale: float) -> np.ndarray:
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)
    return np.exp(-0.5 * d2 / lengthscale**2)


def gp_posterior(
    X: np.ndarray, y: np.ndarray, Xs: np.ndarray, lengthscale: float, noise: float
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and std of a zero-mean unit-variance GP at ``Xs``."""
    K = _se_kernel(X, X, lengthscale) + (noise + 1e-10) * np.eye(len(X))
    L = np.linalg.cholesky(K)
    alpha = np.linalg.solve(L.T, np.linalg.solve(L, y))
    Ks = _se_kernel(X, Xs, lengthscale)
    mu = Ks.T @ alpha
    v = np.linalg.solve(L, Ks)
    var = np.clip(1.0 - (v**2).sum(0), 1e-12, None)
    return mu, np.sqrt(var)


def expected_improvement(mu: np.ndarray, sigma: np.ndarray, best: float) -> np.ndarray:
    """EI for minimization."""
    imp = best - mu
    z = imp / sigma
    return imp * norm.cdf(z) + sigma * norm.pdf(z)


def _decode(idx: np.ndarray, node_ids: list[str]) -> dict[str, ResourceConfig]:
    return {
        nid: ResourceConfig(CPU_GRID[int(idx[2 * k])], MEM_GRID[int(idx[2 * k + 1])])
        for k, nid in enumerate(node_ids)
    }


def bo_optimize(
    dag: WorkflowDag,
    slo: float | None = None,
    backend: ExecutionBackend | None = None,
    pricing: PricingParams | None = None,
    params: BoParams | None = None,
    seed: int = 0,
) -> SearchResult:
    """Joint GP/EI search over every node's (cpu, mem) grid indices.

    The first ``init_random`` samples are uniform on the grid; after that each
    round scores ``n_candidates`` random grid points by expected improvement
    of the penalized workflow cost and runs the best one.
    """
    validate_dag(dag)
    slo = dag.slo if slo is None else float(slo)
    pricing = pricing or dag.pricing or DEFAULT_PRICING
    params = params or BoParams()
    node_ids = sorted(dag.nodes)
    rng = np.random.default_rng(seed)
    executor = Executor(backend, seed)
    tracer = Tracer("bo")
    highs = np.tile([len(CPU_GRID), len(MEM_GRID)], len(node_ids))
    scale = (highs - 1).astype(float)

    X: list[np.ndarray] = []
    y: list[float] = []
    best_feasible: tuple[float, dict] | None = None
    best_any: tuple[float, dict] | None = None
    for i in range(params.budget):
        if i < params.init_random:
            idx = rng.integers(0, highs)
        else:
            cands = rng.integers(0, highs, size=(params.n_candidates, len(highs)))
            obs = np.array(y)
            sd = obs.std()
            ys = (obs - obs.mean()) / sd if sd > 0 else obs - obs.mean()
            mu, sigma = gp_posterior(np.array(X), ys, cands / scale, params.lengthscale, params.noise_ratio)
            idx = cands[int(np.argmax(expected_improvement(mu, sigma, ys.min())))]
        configs = _decode(idx, node_ids)
        dag.apply_configs(configs)
        s = _measure(dag, executor, pricing, slo)
        objective = s.cost if s.ok else s.cost + params.slo_penalty
        improved = s.ok and (best_feasible is None or s.cost < best_feasible[0])
        if improved:
            best_feasible = (s.cost, configs)
        if best_any is None or objective < best_any[0]:
            best_any = (objective, configs)
        tracer.record_workflow("joint", configs, s.makespan, s.cost, improved)
        X.append(idx / scale)
        y.append(objective)

    feasible = best_feasible is not None
    cost, configs = best_feasible if feasible else best_any
    dag.apply_configs(configs)
    return SearchResult(configs, list(tracer.records), cost, feasible)


# -- MAFF coupled descent ---------------------------------------------------


@dataclass(frozen=True)
class MaffParams:
    mem_step: int = 1024
    mb_per_vcpu: int = 1024


def coupled_config(mem: int, params: MaffParams = MaffParams()) -> ResourceConfig:
    cpu = min(CPU_MAX, max(CPU_MIN, mem / params.mb_per_vcpu))
    return ResourceConfig(cpu, mem)


def maff_optimize(
    dag: WorkflowDag,
    slo: float | None = None,
    backend: ExecutionBackend | None = None,
    pricing: PricingParams | None = None,
    params: MaffParams | None = None,
    seed: int = 0,
) -> SearchResult:
    """Coordinate descent on memory with CPU tied to it.

    Each round tries one memory step down on every node, each try a full
    workflow run. The node with the largest cost drop is applied; if that
    candidate breaks the SLO, fails, or saves nothing, the search stops at
    the previous configuration.
    """
    validate_dag(dag)
    slo = dag.slo if slo is None else float(slo)
    pricing = pricing or dag.pricing or DEFAULT_PRICING
    params = params or MaffParams()
    executor = Executor(backend, seed)
    tracer = Tracer("maff")
    node_ids = sorted(dag.nodes)

    dag.apply_configs({nid: coupled_config(MEM_MAX, params) for nid in node_ids})
    base = _measure(dag, executor, pricing, slo)
    tracer.record_workflow("joint", dag.configs(), base.makespan, base.cost, base.ok)
    if not base.ok:
        return SearchResult(dag.configs(), list(tracer.records), base.cost, False)

    current = base.cost
    rounds = 0
    while True:
        cands = [nid for nid in node_ids if dag.nodes[nid].config.mem > MEM_MIN]
        if not cands:
            break
        tried = []
        for nid in cands:
            old = dag.nodes[nid].config
            new = coupled_config(max(MEM_MIN, old.mem - params.mem_step), params)
            dag.nodes[nid].config = new
            s = _measure(dag, executor, pricing, slo)
            gain = -math.inf if s.failed else current - s.cost  # an OOM run saves nothing
            tried.append((gain, nid, new, s, dag.configs()))
            dag.nodes[nid].config = old
        gain, nid, new, s, configs = max(tried, key=lambda t: t[0])  # first node wins ties
        apply = s.ok and gain > 0
        for t in tried:
            chosen = apply and t[1] == nid
            tracer.record(t[1], "joint", t[2].cpu, t[2].mem, t[3].makespan, t[3].cost, chosen, t[4])
        if not apply:
            break
        dag.nodes[nid].config = new
        current = s.cost
        rounds += 1

    return SearchResult(dag.configs(), list(tracer.records), current, True, {"rounds": rounds})
