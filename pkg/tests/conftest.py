from __future__ import annotations

import pytest

from flowtune.graph import Edge, FunctionNode, WorkflowDag
from flowtune.perf import FunctionPerfProfile

_CRITERIA: dict[int, tuple[bool, str]] = {}


def fixed(runtime: float, **kw) -> FunctionPerfProfile:
    """Profile whose runtime is ``runtime`` at any config (no CPU-divisible work)."""
    return FunctionPerfProfile(t0=runtime, cpu_work=0.0, parallel_cap=10.0, **kw)


def make_dag(weights: dict[str, float], edges, slo: float = 100.0, profiles=None) -> WorkflowDag:
    """DAG whose nodes carry fixed runtimes (already set as ``last_runtime``)."""
    profiles = profiles or {nid: fixed(w) for nid, w in weights.items()}
    nodes = [FunctionNode(nid, nid, last_runtime=w) for nid, w in weights.items()]
    return WorkflowDag(nodes, [Edge(*e) for e in edges], slo, profiles)


def diamond(slo: float = 100.0) -> WorkflowDag:
    return make_dag({"A": 2.0, "B": 3.0, "C": 5.0, "D": 1.0}, [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")], slo)


@pytest.fixture
def criterion():
    """Record an acceptance outcome so the terminal summary can list it."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        passed, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
