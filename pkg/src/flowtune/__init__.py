"""Decoupled CPU/memory configuration search for serverless workflows."""

from .baselines import BoParams, MaffParams, bo_optimize, maff_optimize
from .configurator import ResourceOp, TunerParams, allocate, deallocate, priority_configuration
from .cost import PricingParams, aggregate_cost, function_cost
from .graph import (
    Edge,
    FunctionNode,
    Path,
    ResourceConfig,
    SubPath,
    WorkflowDag,
    find_critical_path,
    find_detour_subpaths,
    runtime_sum,
    validate_dag,
)
from .harness import InputClass, dispatch, evaluate_config, input_aware_optimize, run_experiment
from .perf import FunctionPerfProfile, SyntheticBackend, execute_path, execute_workflow, simulate_runtime
from .scheduler import compute_sub_slo, schedule
from .templates import generate_workload, load_template

__version__ = "0.1.0"
