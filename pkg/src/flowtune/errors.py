"""Exception types shared across the package."""

from __future__ import annotations


class FlowtuneError(Exception):
    """Base class for all package errors."""


class ValidationError(FlowtuneError):
    """A workflow violates a structural invariant."""


class CycleDetected(ValidationError):
    pass


class DuplicateNodeId(ValidationError):
    pass


class MultipleSources(ValidationError):
    pass


class MultipleSinks(ValidationError):
    pass


class DanglingEdge(ValidationError):
    pass


class MissingRuntime(FlowtuneError):
    """A node has no measured runtime yet."""


class NodeNotOnPath(FlowtuneError):
    pass


class ConfigOutOfBounds(FlowtuneError):
    pass


class WorkflowExecutionFailed(FlowtuneError):
    """A node failed (out of memory) during execution.

    ``runtimes`` holds the runtimes of nodes that did complete, so callers
    can still account for the time the failed sample consumed.
    """

    def __init__(self, node_id: str, runtimes: dict[str, float] | None = None):
        super().__init__(f"execution of node {node_id!r} failed (oom)")
        self.node_id = node_id
        self.runtimes = dict(runtimes or {})


class InfeasibleSlo(FlowtuneError):
    def __init__(self, makespan: float, slo: float, label: str | None = None):
        where = f" [{label}]" if label else ""
        super().__init__(
            f"base configuration makespan {makespan:.3f}s exceeds SLO {slo:.3f}s{where}"
        )
        self.makespan = makespan
        self.slo = slo
        self.label = label


class UnknownClass(FlowtuneError, KeyError):
    pass


class DegenerateSubSlo(UserWarning):
    """A detour sub-path has no slack left; its nodes keep their configs."""
