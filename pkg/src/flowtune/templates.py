"""Synthetic workload templates: scatter, broadcast and random layered DAGs.

Profile constants live in ``data/templates.json``. Parallel-stage work is
jittered per seed so different seeds give different critical paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from typing import Any

import numpy as np

from .graph import Edge, FunctionNode, WorkflowDag
from .perf import FunctionPerfProfile, NoiselessBackend, execute_workflow

TEMPLATE_NAMES = ("chatbot", "mlpipeline", "videoanalysis", "random")


@lru_cache(maxsize=1)
def _template_data() -> dict[str, Any]:
    return json.loads(resources.files("flowtune").joinpath("data/templates.json").read_text())


@dataclass(frozen=True)
class WorkloadTemplate:
    name: str
    topology: str
    fan_out: int
    slo_default: float | None
    data: dict

    def with_fan_out(self, fan_out: int | None) -> WorkloadTemplate:
        return self if fan_out is None else replace(self, fan_out=fan_out)


def load_template(name: str, fan_out: int | None = None) -> WorkloadTemplate:
    data = _template_data()
    if name not in data:
        raise KeyError(f"unknown template {name!r}; choose from {', '.join(TEMPLATE_NAMES)}")
    d = data[name]
    t = WorkloadTemplate(name, d["topology"], int(d["fan_out"]), d.get("slo"), d)
    return t.with_fan_out(fan_out)


def _profile(name: str, fields: dict, noise: float | None, work_scale: float = 1.0) -> FunctionPerfProfile:
    p = FunctionPerfProfile(name=name, **fields)
    p = replace(p, cpu_work=p.cpu_work * work_scale)
    return p if noise is None else replace(p, noise_sigma=noise)


def _jitter(rng: np.random.Generator, amount: float) -> float:
    return 1.0 + amount * float(rng.uniform(-1.0, 1.0))


def _scatter(t: WorkloadTemplate, rng, noise):
    d = t.data
    src, src_p = d["source"]
    br, br_p = d["branch"]
    snk, snk_p = d["sink"]
    profiles = {src: _profile(src, src_p, noise), snk: _profile(snk, snk_p, noise)}
    nodes = [FunctionNode(src, src)]
    edges = []
    for i in range(1, t.fan_out + 1):
        nid = f"{br}_{i}"
        profiles[nid] = _profile(nid, br_p, noise, _jitter(rng, d.get("jitter", 0.0)))
        nodes.append(FunctionNode(nid, nid))
        edges += [Edge(src, nid), Edge(nid, snk)]
    nodes.append(FunctionNode(snk, snk))
    return nodes, edges, profiles


def _broadcast(t: WorkloadTemplate, rng, noise):
    d = t.data
    src, src_p = d["source"]
    join, join_p = d["join"]
    profiles = {src: _profile(src, src_p, noise), join: _profile(join, join_p, noise)}
    nodes = [FunctionNode(src, src)]
    edges = []
    branches = d["branches"]
    for i in range(t.fan_out):
        base, fields = branches[i % len(branches)]
        nid = base if i < len(branches) else f"{base}_{i // len(branches) + 1}"
        profiles[nid] = _profile(nid, fields, noise, _jitter(rng, d.get("jitter", 0.0)))
        nodes.append(FunctionNode(nid, nid))
        edges += [Edge(src, nid), Edge(nid, join)]
    nodes.append(FunctionNode(join, join))
    prev = join
    for name, fields in d.get("tail", []):
        profiles[name] = _profile(name, fields, noise)
        nodes.append(FunctionNode(name, name))
        edges.append(Edge(prev, name))
        prev = name
    return nodes, edges, profiles


def _random_profile(name: str, d: dict, rng, noise) -> FunctionPerfProfile:
    floor = float(rng.choice(d["mem_floor"]))
    lo, hi = d["mem_knee_extra"]
    return FunctionPerfProfile(
        t0=float(rng.uniform(*d["t0"])),
        cpu_work=float(rng.uniform(*d["cpu_work"])),
        parallel_cap=float(rng.choice(d["parallel_cap"])),
        mem_floor=floor,
        mem_knee=floor + float(rng.integers(lo // 64, hi // 64 + 1)) * 64,
        mem_slowdown=float(rng.uniform(*d["mem_slowdown"])),
        noise_sigma=d["noise_sigma"] if noise is None else noise,
        name=name,
    )


def _random_dag(t: WorkloadTemplate, rng, noise):
    d = t.data
    lo, hi = d["layers"]
    n_layers = int(rng.integers(lo, hi + 1))
    layers = [[f"n{k}_{j}" for j in range(int(rng.integers(1, t.fan_out + 1)))] for k in range(1, n_layers + 1)]
    ids = ["src"] + [n for layer in layers for n in layer] + ["sink"]
    edges: set[tuple[str, str]] = set()
    edges |= {("src", n) for n in layers[0]}
    edges |= {(n, "sink") for n in layers[-1]}
    for k in range(1, n_layers):
        upper, lower = layers[k - 1], layers[k]
        for n in lower:
            edges.add((upper[int(rng.integers(len(upper)))], n))
        for u in upper:
            if not any(e[0] == u for e in edges):
                edges.add((u, lower[int(rng.integers(len(lower)))]))
        for j in range(k - 1):
            for u in layers[j]:
                if rng.uniform() < 0.2:
                    edges.add((u, lower[int(rng.integers(len(lower)))]))
    profiles = {nid: _random_profile(nid, d, rng, noise) for nid in ids}
    nodes = [FunctionNode(nid, nid) for nid in ids]
    return nodes, [Edge(*e) for e in sorted(edges)], profiles


def generate_workload(
    template: WorkloadTemplate | str, seed: int = 0, noise_sigma: float | None = None, slo: float | None = None
) -> WorkflowDag:
    """Build a deterministic workflow from ``template`` and ``seed``.

    ``noise_sigma`` overrides every profile's noise level (0 gives a noiseless
    workload). Random DAGs get an SLO of ``slo_factor`` times their noiseless
    makespan at full resources.
    """
    t = load_template(template) if isinstance(template, str) else template
    rng = np.random.default_rng([seed, sum(map(ord, t.name))])
    build = {"scatter": _scatter, "broadcast": _broadcast, "random-dag": _random_dag}[t.topology]
    nodes, edges, profiles = build(t, rng, noise_sigma)
    dag = WorkflowDag(nodes, edges, t.slo_default or 1.0, profiles)
    if slo is not None:
        dag.slo = float(slo)
    elif t.slo_default is None:
        probe = dag.copy()
        dag.slo = math.ceil(t.data["slo_factor"] * execute_workflow(probe, NoiselessBackend()) * 10) / 10
    return dag


def scale_workflow(dag: WorkflowDag, factor: float) -> WorkflowDag:
    """Copy of ``dag`` whose profiles describe an input ``factor`` times larger."""
    if factor <= 0:
        raise ValueError("input scale must be positive")
    out = dag.copy()
    out.profiles = {name: p.scaled(factor) for name, p in dag.profiles.items()}
    return out
