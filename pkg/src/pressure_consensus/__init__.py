"""Opinion dynamics under a time-varying peer-pressure schedule.

Simulates the stubbornness-weighted pressure update on a weighted graph,
computes per-step fixed points and contraction constants, and evaluates
whether the running product of contraction constants vanishes, which is
what guarantees convergence to the consensus value.
"""
from ._backend import NUMBA_ENABLED, backend_name
from .contraction import (
    Classification,
    ContractionReport,
    classify_product,
    contraction_constant,
    contraction_constants,
    contraction_report,
    iteration_matrix,
    max_row_sum_constant,
    norm_ratio,
    partial_product,
    partial_products,
    schedule_report,
    telescoped_bound,
)
from .errors import *  # noqa: F401,F403
from .experiments import (
    ScalarScenarioResult,
    ScenarioResult,
    k2_system,
    run_convergent,
    run_counterexample,
    run_scalar_family,
    run_scenario,
)
from .scalar import ScalarFamily, euler_phi, scalar_compose, scalar_orbit
from .schedule import PressureSchedule
from .system import (
    AsymmetricAdjacencyWarning,
    OpinionSystem,
    Trajectory,
    build_system,
    consensus_limit,
    fixed_point,
    fixed_points,
    simulate,
    step,
)

__version__ = "0.1.0"
