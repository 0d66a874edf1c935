"""Risk-sensitive stochastic optimal growth: solver, diagnostics, dynamics.

Solves the one-sector growth model in which continuation utility is
aggregated by the entropic certainty equivalent instead of expectation,
via weighted-norm contraction value iteration, and verifies the solution
against the structural properties the theory guarantees (shape, Euler
equation, envelope, Lyapunov drift, stationarity).
"""

from .bellman import (Grid, Policy, SolveResult, ValueFunction, apply_operator,
                      evaluate_policy_finite, policy_values, sandwich_check,
                      solve, w_norm_distance, write_solution_csv)
from .dynamics import (DriftReport, SimulationTrace, StationaryReport,
                       drift_check, lyapunov_w1, simulate, stationary_estimate)
from .errors import ConvergenceError, InfeasiblePolicyError, SpecError
from .euler import (EulerReport, envelope_check, euler_report, euler_residual,
                    tilt_weights, vhat_derivative)
from .model import (DiscreteShock, ModelSpec, ProductionSpec, UtilitySpec,
                    WeightFunction, default_x_max, make_preset,
                    model_from_dict, model_to_dict, validate)
from .risk import (association_lower_bound_check, certainty_equivalent,
                   expected_value, subadditivity_check, taylor_approx)
from .verify import GateResult, VerifyContext, run_all

__version__ = "0.1.0"

__all__ = [
    "Grid", "Policy", "SolveResult", "ValueFunction", "apply_operator",
    "evaluate_policy_finite", "policy_values", "sandwich_check", "solve",
    "w_norm_distance", "write_solution_csv",
    "DriftReport", "SimulationTrace", "StationaryReport", "drift_check",
    "lyapunov_w1", "simulate", "stationary_estimate",
    "ConvergenceError", "InfeasiblePolicyError", "SpecError",
    "EulerReport", "envelope_check", "euler_report", "euler_residual",
    "tilt_weights", "vhat_derivative",
    "DiscreteShock", "ModelSpec", "ProductionSpec", "UtilitySpec",
    "WeightFunction", "default_x_max", "make_preset", "model_from_dict",
    "model_to_dict", "validate",
    "association_lower_bound_check", "certainty_equivalent", "expected_value",
    "subadditivity_check", "taylor_approx",
    "GateResult", "VerifyContext", "run_all",
]
