"""Synthetic function runtime model and the execution backends built on it.

Runtime of one invocation::

    t = (t0 + cpu_work / min(cpu, parallel_cap) + mem_penalty(mem)) * noise

``mem_penalty`` ramps linearly from 0 at ``mem_knee`` up to ``mem_slowdown``
at ``mem_floor``; below ``mem_floor`` the invocation fails with OOM. The
noise factor is ``max(0.01, 1 + noise_sigma * g)`` where ``g`` is a standard
normal draw from numpy's PCG64 generator seeded with the invocation seed.
"""

from __future__ import annotations

import hashlib
import shlex
import subprocess
from dataclasses import asdict, dataclass, replace
from typing import Protocol, Sequence

import numpy as np

from .errors import ConfigOutOfBounds, WorkflowExecutionFailed
from .graph import CPU_MIN, ResourceConfig, WorkflowDag, find_critical_path


@dataclass(frozen=True)
class FunctionPerfProfile:
    t0: float
    cpu_work: float
    parallel_cap: float
    mem_floor: float = 128
    mem_knee: float = 128
    mem_slowdown: float = 0.0
    noise_sigma: float = 0.0
    name: str = ""

    def __post_init__(self):
        for k in ("t0", "cpu_work", "parallel_cap", "mem_floor", "mem_knee", "mem_slowdown", "noise_sigma"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be >= 0")
        if self.mem_floor > self.mem_knee:
            raise ValueError("mem_floor must not exceed mem_knee")
        if self.parallel_cap < CPU_MIN:
            raise ValueError("parallel_cap must be at least the minimum vCPU allocation")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("name")
        return d

    def scaled(self, factor: float) -> FunctionPerfProfile:
        """Profile for an input ``factor`` times larger: more work, higher memory knee."""
        knee = max(self.mem_floor, self.mem_knee * factor)
        return replace(self, cpu_work=self.cpu_work * factor, mem_knee=knee)


@dataclass(frozen=True)
class ExecutionResult:
    runtime: float
    success: bool = True
    failure_kind: str = "none"


def standard_normal(seed: int) -> float:
    return float(np.random.default_rng(seed).standard_normal())


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
    h = hashlib.blake2b(":".join(map(str, parts)).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little") >> 1


def mem_penalty(profile: FunctionPerfProfile, mem: float) -> float:
    span = profile.mem_knee - profile.mem_floor
    if span <= 0 or mem >= profile.mem_knee:
        return 0.0
    return profile.mem_slowdown * (profile.mem_knee - mem) / span


def simulate_runtime(profile: FunctionPerfProfile, config: ResourceConfig, seed: int) -> ExecutionResult:
    if not config.in_bounds():
        raise ConfigOutOfBounds(f"{config} outside [0.1, 10] vCPU x [128, 10240] MB")
    if config.mem < profile.mem_floor:
        return ExecutionResult(0.0, False, "oom")
    base = profile.t0 + profile.cpu_work / min(config.cpu, profile.parallel_cap) + mem_penalty(profile, config.mem)
    if profile.noise_sigma > 0:
        base *= max(0.01, 1.0 + profile.noise_sigma * standard_normal(seed))
    return ExecutionResult(base)


class ExecutionBackend(Protocol):
    """Runs one function invocation; must be deterministic for a fixed seed."""

    def run(self, profile: FunctionPerfProfile, config: ResourceConfig, seed: int) -> ExecutionResult: ...


class SyntheticBackend:
    def run(self, profile: FunctionPerfProfile, config: ResourceConfig, seed: int) -> ExecutionResult:
        return simulate_runtime(profile, config, seed)


class NoiselessBackend:
    """Synthetic model with noise switched off regardless of the profile."""

    def run(self, profile: FunctionPerfProfile, config: ResourceConfig, seed: int) -> ExecutionResult:
        return simulate_runtime(replace(profile, noise_sigma=0.0), config, seed)


class CommandBackend:
    """Shells out to an external program and parses a runtime from its stdout.

    The command is invoked as ``<command> <profile-name> <cpu> <mem> <seed>``
    and must print one floating-point number of seconds. A non-zero exit
    status is reported as an OOM failure.
    """

    def __init__(self, command: str | Sequence[str], timeout: float | None = None):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout

    def run(self, profile: FunctionPerfProfile, config: ResourceConfig, seed: int) -> ExecutionResult:
        argv = self.argv + [profile.name, repr(config.cpu), str(config.mem), str(seed)]
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=self.timeout)
        if proc.returncode != 0:
            return ExecutionResult(0.0, False, "oom")
        return ExecutionResult(float(proc.stdout.strip().split()[-1]))


class Executor:
    """Runs nodes of a workflow with per-invocation seeds.

    Each invocation gets ``derive_seed(run_seed, node_id, n)`` where ``n``
    counts earlier invocations of that node through this executor, so a
    search replays identically for the same run seed.
    """

    def __init__(self, backend: ExecutionBackend | None = None, seed: int = 0):
        self.backend = backend if backend is not None else SyntheticBackend()
        self.seed = seed
        self._calls: dict[str, int] = {}

    def run_node(self, dag: WorkflowDag, node_id: str) -> ExecutionResult:
        n = self._calls.get(node_id, 0)
        self._calls[node_id] = n + 1
        node = dag.nodes[node_id]
        return self.backend.run(dag.profile_of(node_id), node.config, derive_seed(self.seed, node_id, n))

    def _run_all(self, dag: WorkflowDag, node_ids: Sequence[str]) -> dict[str, float]:
        done: dict[str, float] = {}
        failed = None
        for nid in node_ids:
            res = self.run_node(dag, nid)
            if res.success:
                done[nid] = res.runtime
            elif failed is None:
                failed = nid
        if failed is not None:
            raise WorkflowExecutionFailed(failed, done)
        for nid, rt in done.items():
            dag.nodes[nid].last_runtime = rt
        return done

    def execute_workflow(self, dag: WorkflowDag) -> float:
        order = sorted(dag.nodes)
        self._run_all(dag, order)
        return find_critical_path(dag).total_runtime

    def execute_path(self, dag: WorkflowDag, node_ids: Sequence[str]) -> tuple[float, dict[str, float]]:
        runtimes = self._run_all(dag, node_ids)
        total = 0.0
        for nid in node_ids:
            total += runtimes[nid]
        return total, runtimes


def execute_workflow(dag: WorkflowDag, backend: ExecutionBackend | None = None, seed: int = 0) -> float:
    """Run every node once and return the makespan (heaviest path)."""
    return Executor(backend, seed).execute_workflow(dag)


def execute_path(
    dag: WorkflowDag, node_ids: Sequence[str], backend: ExecutionBackend | None = None, seed: int = 0
) -> tuple[float, dict[str, float]]:
    return Executor(backend, seed).execute_path(dag, node_ids)


def makespan_of(dag: WorkflowDag, runtimes: dict[str, float]) -> float:
    """Heaviest-path length using ``runtimes`` (missing nodes count as zero)."""
    saved = {nid: n.last_runtime for nid, n in dag.nodes.items()}
    try:
        for nid, n in dag.nodes.items():
            n.last_runtime = runtimes.get(nid, 0.0)
        return find_critical_path(dag).total_runtime
    finally:
        for nid, rt in saved.items():
            dag.nodes[nid].last_runtime = rt


__all__ = [
    "CommandBackend",
    "ExecutionBackend",
    "ExecutionResult",
    "Executor",
    "FunctionPerfProfile",
    "NoiselessBackend",
    "SyntheticBackend",
    "derive_seed",
    "execute_path",
    "execute_workflow",
    "makespan_of",
    "mem_penalty",
    "simulate_runtime",
]
