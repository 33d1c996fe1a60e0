import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowtune.cost import DEFAULT_PRICING, PricingParams, aggregate_cost, function_cost
from flowtune.graph import ResourceConfig

ONE = ResourceConfig(1, 1024)


def test_default_price_constants():
    assert (DEFAULT_PRICING.mu0, DEFAULT_PRICING.mu1, DEFAULT_PRICING.mu2) == (0.512, 0.001, 0.0)


def test_function_cost_examples():
    assert function_cost(10, ONE) == pytest.approx(5.13, abs=1e-12)
    assert function_cost(0, ResourceConfig(3, 640)) == 0.0
    assert function_cost(10, ResourceConfig(2, 2048)) == pytest.approx(10.26, abs=1e-12)


def test_aggregate_cost_examples():
    assert aggregate_cost([]) == 0
    assert aggregate_cost([(10, ONE), (10, ONE)]) == pytest.approx(10.26, abs=1e-12)
    assert aggregate_cost([(7.5, ONE)]) == function_cost(7.5, ONE)


def test_request_price_is_per_invocation():
    p = PricingParams(0.512, 0.001, 2.0)
    assert function_cost(0, ONE, p) == 2.0


@given(st.floats(0, 1e4), st.floats(0.1, 10), st.integers(128, 10240), st.floats(0.01, 100))
def test_cost_is_linear_in_runtime(t, cpu, mem, k):
    c = ResourceConfig(cpu, mem)
    assert function_cost(t * k, c) == pytest.approx(k * function_cost(t, c), rel=1e-9, abs=1e-12)
