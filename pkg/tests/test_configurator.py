from collections import defaultdict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowtune.configurator import ResourceOp, TunerParams, allocate, deallocate, priority_configuration
from flowtune.graph import MAX_CONFIG, Edge, FunctionNode, ResourceConfig, WorkflowDag
from flowtune.perf import Executor, FunctionPerfProfile, SyntheticBackend


class CountingBackend(SyntheticBackend):
    def __init__(self):
        self.calls = 0

    def run(self, profile, config, seed):
        self.calls += 1
        return super().run(profile, config, seed)


STEPPED = FunctionPerfProfile(t0=1, cpu_work=10, parallel_cap=10)


def single(profile, slo=120.0):
    dag = WorkflowDag([FunctionNode("f", "f", MAX_CONFIG)], [], slo, {"f": profile})
    ex = Executor()
    ex.execute_workflow(dag)
    return dag, ex


def chain_of(profiles, slo):
    ids = list(profiles)
    dag = WorkflowDag([FunctionNode(i, i) for i in ids], [Edge(a, b) for a, b in zip(ids, ids[1:])], slo, profiles)
    ex = Executor()
    ex.execute_workflow(dag)
    return dag, ex


def test_deallocate_examples():
    assert deallocate(ResourceOp("f", "cpu", 1.0, 3), ResourceConfig(4.0, 512)) == ResourceConfig(3.0, 512)
    assert deallocate(ResourceOp("f", "mem", 1024, 3), ResourceConfig(4.0, 192)) == ResourceConfig(4.0, 128)
    assert deallocate(ResourceOp("f", "cpu", 0.5, 3), ResourceConfig(0.1, 512)) is None
    assert deallocate(ResourceOp("f", "mem", 64, 3), ResourceConfig(1.0, 128)) is None


def test_allocate_examples():
    node = FunctionNode("f", "f", ResourceConfig(1.0, 512))
    before = ResourceConfig(1.0, 1536)
    assert allocate(ResourceOp("f", "mem", 1024, 3), node, before) == (512, 2)
    assert node.config == before
    assert allocate(ResourceOp("f", "cpu", 0.1, 1), node, before) == (0.1, 0)


def test_flat_memory_descends_to_floor():
    dag, ex = single(FunctionPerfProfile(t0=1, cpu_work=8, parallel_cap=4))
    res = priority_configuration(dag, ["f"], 120.0, ex)
    mems = [r.mem for r in res.trace if r.op_type == "mem" and r.accepted]
    assert mems == [9216 - 1024 * k for k in range(9)] + [128]
    assert res.configs["f"].mem == 128


def test_empty_path():
    dag, ex = single(FunctionPerfProfile(t0=1, cpu_work=8, parallel_cap=4))
    be = CountingBackend()
    res = priority_configuration(dag, [], 10.0, Executor(be))
    assert res.configs == {} and res.samples == 0 and be.calls == 0


def test_slo_breach_is_reverted():
    # runtime 1 + 10/cpu; SLO 3 admits cpu >= 5 only
    dag, ex = single(STEPPED, slo=3.0)
    res = priority_configuration(dag, ["f"], 3.0, ex)
    cpu_rows = [r for r in res.trace if r.op_type == "cpu"]
    assert [r.cpu for r in cpu_rows] == [9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 4.5, 4.75]
    assert [r.accepted for r in cpu_rows] == [True] * 5 + [False] * 3
    assert dag.nodes["f"].config.cpu == 5.0
    assert dag.nodes["f"].last_runtime == 3.0


def replay(trace, initial):
    """Walk a trace, checking each sample differs from the accepted state only at its op's node."""
    state = dict(initial)
    for r in trace:
        cfg = r.config_map()
        changed = {n for n in cfg if cfg[n] != state[n]}
        assert changed <= {r.node_id}
        if r.accepted:
            state = cfg
    return state


def op_steps(trace, initial):
    """Per-op list of (step, accepted) reconstructed from consecutive configs."""
    state = dict(initial)
    steps = defaultdict(list)
    for r in trace:
        cfg = r.config_map()
        old, new = state[r.node_id], cfg[r.node_id]
        step = round(old.cpu - new.cpu, 9) if r.op_type == "cpu" else old.mem - new.mem
        steps[(r.node_id, r.op_type)].append((step, r.accepted))
        if r.accepted:
            state = cfg
    return steps


def test_backoff_sequence_floors_at_granularity():
    params = TunerParams(func_trial=4, step0_cpu=0.4)
    dag, ex = single(STEPPED, slo=3.0)
    res = priority_configuration(dag, ["f"], 3.0, ex, params=params)
    steps = op_steps(res.trace, {"f": MAX_CONFIG})[("f", "cpu")]
    reverted = [s for s, ok in steps if not ok]
    assert reverted == [0.4, 0.2, 0.1, 0.1]
    assert dag.nodes["f"].config.cpu == 5.0


def test_op_retires_after_func_trial_reverts():
    dag, ex = single(STEPPED, slo=3.0)
    res = priority_configuration(dag, ["f"], 3.0, ex)
    rows = [r for r in res.trace if r.op_type == "cpu"]
    last_fail = [i for i, r in enumerate(rows) if not r.accepted][2]
    assert last_fail == len(rows) - 1


def test_floor_retirement_spends_no_sample():
    dag, ex = single(FunctionPerfProfile(t0=1, cpu_work=0.01, parallel_cap=10), slo=120.0)
    res = priority_configuration(dag, ["f"], 120.0, ex, params=TunerParams(max_trail=1000))
    assert res.configs["f"] == ResourceConfig(0.1, 128)
    assert res.samples == len(res.trace)


@st.composite
def profiles(draw):
    floor = draw(st.sampled_from([128, 512, 1024]))
    return FunctionPerfProfile(
        t0=draw(st.floats(0.1, 5)),
        cpu_work=draw(st.floats(0, 50)),
        parallel_cap=draw(st.sampled_from([1.0, 2.0, 4.0, 8.0])),
        mem_floor=floor,
        mem_knee=floor + draw(st.sampled_from([0, 1024, 4096])),
        mem_slowdown=draw(st.floats(0, 20)),
        noise_sigma=draw(st.sampled_from([0.0, 0.05])),
    )


@settings(max_examples=40, deadline=None)
@given(st.lists(profiles(), min_size=1, max_size=3), st.floats(1.2, 4.0), st.integers(1, 60), st.integers(1, 4))
def test_mechanics_properties(profs, slack, max_trail, func_trial):
    ps = {f"n{i}": p for i, p in enumerate(profs)}
    dag, _ = chain_of(ps, 1.0)
    base = sum(n.last_runtime for n in dag.nodes.values())
    slo = base * slack
    be = CountingBackend()
    params = TunerParams(func_trial=func_trial, max_trail=max_trail)
    res = priority_configuration(dag, list(ps), slo, Executor(be, seed=7), params=params)

    assert res.samples == len(res.trace) <= max_trail
    assert be.calls == res.samples * len(ps)
    final = replay(res.trace, {n: MAX_CONFIG for n in ps})
    assert final == dag.configs() == res.configs
    costs = res.accepted_costs
    assert all(b < a for a, b in zip(costs, costs[1:]))
    for key, seq in op_steps(res.trace, {n: MAX_CONFIG for n in ps}).items():
        assert sum(not ok for _, ok in seq) <= func_trial
        fails = [i for i, (_, ok) in enumerate(seq) if not ok]
        if len(fails) == func_trial:
            assert fails[-1] == len(seq) - 1


def test_params_validation():
    with pytest.raises(ValueError):
        TunerParams(step0_cpu=0.05)
    with pytest.raises(ValueError):
        TunerParams(max_trail=0)
