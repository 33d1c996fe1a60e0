"""JSON workflow and config files.

Workflow file::

    {
      "slo_seconds": 120,
      "profiles": {"train": {"t0": 2, "cpu_work": 40, "parallel_cap": 4, ...}},
      "nodes": [{"id": "a", "profile": "train", "cpu_init": 10, "mem_init": 10240}],
      "edges": [{"from": "a", "to": "b"}],
      "pricing": {"mu0": 0.512, "mu1": 0.001, "mu2": 0}
    }

Config file: ``{"node-id": {"cpu": 2.5, "mem": 512}, ...}``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .cost import PricingParams
from .graph import MAX_CONFIG, Edge, FunctionNode, ResourceConfig, WorkflowDag
from .perf import FunctionPerfProfile


def workflow_from_dict(doc: Mapping[str, Any]) -> WorkflowDag:
    profiles = {
        name: FunctionPerfProfile(name=name, **fields) for name, fields in doc.get("profiles", {}).items()
    }
    nodes = []
    for n in doc["nodes"]:
        cfg = ResourceConfig(float(n.get("cpu_init", MAX_CONFIG.cpu)), int(n.get("mem_init", MAX_CONFIG.mem)))
        nodes.append(FunctionNode(n["id"], n.get("profile", n["id"]), cfg))
    edges = [Edge(e["from"], e["to"]) for e in doc.get("edges", [])]
    pricing = PricingParams(**doc["pricing"]) if doc.get("pricing") else None
    return WorkflowDag(nodes, edges, doc["slo_seconds"], profiles, pricing)


def workflow_to_dict(dag: WorkflowDag) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "slo_seconds": dag.slo,
        "profiles": {name: p.to_dict() for name, p in sorted(dag.profiles.items())},
        "nodes": [
            {"id": n.id, "profile": n.profile_ref, "cpu_init": n.config.cpu, "mem_init": n.config.mem}
            for n in dag.node_list
        ],
        "edges": [{"from": e.src, "to": e.dst} for e in dag.edges],
    }
    if dag.pricing is not None:
        p = dag.pricing
        doc["pricing"] = {"mu0": p.mu0, "mu1": p.mu1, "mu2": p.mu2}
    return doc


def load_workflow(path: str | Path) -> WorkflowDag:
    return workflow_from_dict(json.loads(Path(path).read_text()))


def save_workflow(dag: WorkflowDag, path: str | Path) -> None:
    Path(path).write_text(json.dumps(workflow_to_dict(dag), indent=2) + "\n")


def configs_to_dict(configs: Mapping[str, ResourceConfig]) -> dict[str, dict]:
    return {nid: c.to_dict() for nid, c in sorted(configs.items())}


def configs_from_dict(doc: Mapping[str, Mapping[str, Any]]) -> dict[str, ResourceConfig]:
    return {nid: ResourceConfig(float(c["cpu"]), int(c["mem"])) for nid, c in doc.items()}


def save_configs(configs: Mapping[str, ResourceConfig], path: str | Path) -> None:
    Path(path).write_text(json.dumps(configs_to_dict(configs), indent=2) + "\n")


def load_configs(path: str | Path) -> dict[str, ResourceConfig]:
    return configs_from_dict(json.loads(Path(path).read_text()))
