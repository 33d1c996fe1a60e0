import pytest
from conftest import diamond, make_dag
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import all_paths, heaviest_path_weight, random_dag

from flowtune.errors import (
    CycleDetected,
    DanglingEdge,
    DuplicateNodeId,
    MissingRuntime,
    MultipleSinks,
    MultipleSources,
    NodeNotOnPath,
    ValidationError,
)
from flowtune.graph import (
    FunctionNode,
    ResourceConfig,
    WorkflowDag,
    find_critical_path,
    find_detour_subpaths,
    path_of,
    runtime_sum,
    topological_order,
    validate_dag,
)


def chain(n=3, w=1.0):
    ids = [chr(ord("A") + i) for i in range(n)]
    return make_dag({i: w for i in ids}, list(zip(ids, ids[1:])))


def test_validate_accepts_chain():
    assert validate_dag(chain()) is None


@pytest.mark.parametrize(
    "nodes, edges, exc",
    [
        ("AB", [("A", "B"), ("B", "A")], CycleDetected),
        ("ABC", [("A", "C")], MultipleSources),
        ("ABC", [("A", "B"), ("A", "C")], MultipleSinks),
        ("AB", [("A", "X")], DanglingEdge),
        ("AB", [("A", "A"), ("A", "B")], CycleDetected),
        ("ABA", [("A", "B")], DuplicateNodeId),
    ],
)
def test_validate_rejects(nodes, edges, exc):
    dag = WorkflowDag([FunctionNode(n, n) for n in nodes], edges, 10)
    with pytest.raises(exc):
        validate_dag(dag)


def test_validate_rejects_empty_and_bad_slo():
    with pytest.raises(ValidationError):
        validate_dag(WorkflowDag([], [], 1))
    with pytest.raises(ValidationError):
        validate_dag(WorkflowDag([FunctionNode("A", "A")], [], 0))


def test_topological_order_is_deterministic():
    dag = diamond()
    assert topological_order(dag) == ["A", "B", "C", "D"]


def test_critical_path_diamond():
    cp = find_critical_path(diamond())
    assert cp.node_ids == ["A", "C", "D"]
    assert cp.total_runtime == 8.0


def test_critical_path_chain():
    cp = find_critical_path(chain())
    assert cp.node_ids == ["A", "B", "C"] and cp.total_runtime == 3.0


def test_critical_path_tie_prefers_smaller_ids():
    dag = make_dag({"s": 1, "x": 2, "b": 2, "t": 1}, [("s", "x"), ("s", "b"), ("x", "t"), ("b", "t")])
    assert find_critical_path(dag).node_ids == ["s", "b", "t"]


def test_critical_path_tie_across_prefix_lengths():
    # s-a-t and s-a-c-t both weigh 4 when c weighs 0; ("s","a","c",...) sorts before ("s","a","t").
    dag = make_dag({"s": 1, "a": 2, "c": 0.0, "t": 1}, [("s", "a"), ("a", "c"), ("a", "t"), ("c", "t")])
    cp = find_critical_path(dag)
    assert cp.node_ids == ["s", "a", "c", "t"]
    assert cp.total_runtime == 4


def test_critical_path_needs_runtimes():
    dag = chain()
    dag.nodes["B"].last_runtime = None
    with pytest.raises(MissingRuntime):
        find_critical_path(dag)


def test_detours_diamond():
    dag = diamond()
    sps = find_detour_subpaths(dag, find_critical_path(dag))
    assert [(s.start, s.end, s.interior) for s in sps] == [("A", "D", ["B"])]


def test_detours_chain_is_empty():
    dag = chain()
    assert find_detour_subpaths(dag, find_critical_path(dag)) == []


def test_detours_scatter():
    dag = make_dag(
        {"A": 1, "B1": 2, "B2": 5, "B3": 3, "C": 1},
        [("A", "B1"), ("A", "B2"), ("A", "B3"), ("B1", "C"), ("B2", "C"), ("B3", "C")],
    )
    cp = find_critical_path(dag)
    assert cp.node_ids == ["A", "B2", "C"]
    sps = find_detour_subpaths(dag, cp)
    assert [(s.start, s.end, s.interior) for s in sps] == [("A", "C", ["B1"]), ("A", "C", ["B3"])]


def test_detours_multi_node_and_nested():
    # A -> B -> C -> D on the critical path; X -> Y bypasses B and C, Z bypasses C.
    w = {"A": 1, "B": 9, "C": 9, "D": 1, "X": 1, "Y": 1, "Z": 1}
    e = [("A", "B"), ("B", "C"), ("C", "D"), ("A", "X"), ("X", "Y"), ("Y", "D"), ("B", "Z"), ("Z", "D")]
    dag = make_dag(w, e)
    sps = find_detour_subpaths(dag, find_critical_path(dag))
    assert [(s.start, s.end, s.interior) for s in sps] == [("A", "D", ["X", "Y"]), ("B", "D", ["Z"])]


def test_runtime_sum_examples():
    dag = diamond()
    cp = find_critical_path(dag)
    assert runtime_sum(cp, "A", "D") == 5.0
    assert runtime_sum(cp, "A", "C") == 0.0
    five = chain(5, 2.0)
    p = find_critical_path(five)
    assert runtime_sum(p, "A", "E") == 6.0


def test_runtime_sum_errors():
    dag = diamond()
    cp = find_critical_path(dag)
    with pytest.raises(NodeNotOnPath):
        runtime_sum(cp, "A", "B")
    with pytest.raises(ValueError):
        runtime_sum(cp, "D", "A")


def test_path_reads_live_runtimes():
    dag = chain()
    p = path_of(dag, ["A", "B"])
    dag.nodes["A"].last_runtime = 4.0
    assert p.total_runtime == 5.0


def test_resource_config_bounds():
    assert ResourceConfig(0.1, 128).in_bounds()
    assert not ResourceConfig(0.05, 128).in_bounds()
    assert not ResourceConfig(1, 10241).in_bounds()


def _dag_from(seed):
    ids, edges, w = random_dag(seed)
    return ids, edges, w, make_dag(w, edges)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_critical_path_matches_enumeration(seed):
    ids, edges, w, dag = _dag_from(seed)
    validate_dag(dag)
    cp = find_critical_path(dag)
    assert cp.total_runtime == heaviest_path_weight(ids, edges, w)
    assert cp.node_ids in all_paths(ids, edges)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_detours_cover_every_off_path_node(seed):
    ids, edges, w, dag = _dag_from(seed)
    cp = find_critical_path(dag)
    on = set(cp.node_ids)
    sps = find_detour_subpaths(dag, cp)
    covered = {n for s in sps for n in s.interior}
    assert covered == set(ids) - on
    edge_set = set(edges)
    for s in sps:
        hops = [s.start, *s.interior, s.end]
        assert all(h in edge_set for h in zip(hops, hops[1:]))
        assert not on.intersection(s.interior)
        assert cp.index(s.start) < cp.index(s.end)
