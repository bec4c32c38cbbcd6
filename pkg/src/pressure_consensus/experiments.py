"""Scripted scenarios: the two-agent oscillating and converging runs and the
scalar families."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contraction import ContractionReport, contraction_constants, contraction_report, telescoped_bound
from .scalar import ScalarFamily, euler_phi, scalar_orbit
from .schedule import PressureSchedule
from .system import OpinionSystem, Trajectory, build_system, simulate

DEFAULT_TOLERANCE = 1e-3
K2_PREFERRED = (0.1, 0.5)


def k2_system(a: float = K2_PREFERRED[0], b: float = K2_PREFERRED[1]) -> OpinionSystem:
    """Two agents joined by a unit edge, unit stubbornness."""
    return build_system([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0], [a, b])


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    trajectory: Trajectory
    report: ContractionReport
    residuals: np.ndarray  # ||x_k - x*||_inf for k = 0..K
    residual_floor: float
    final_residual: float
    converged: bool
    tolerance: float
    bound_slack: np.ndarray  # telescoped bound minus ||x_k - x_k*||, k = 1..K

    def summary(self) -> dict:
        out = {
            "steps": self.trajectory.steps,
            "limit": self.trajectory.limit.tolist(),
            "final_state": self.trajectory.states[-1].tolist(),
            "final_residual": self.final_residual,
            "residual_floor": self.residual_floor,
            "converged": self.converged,
            "tolerance": self.tolerance,
            "min_bound_slack": float(self.bound_slack.min()),
        }
        out.update(self.report.summary())
        return out


def tail_window(steps: int) -> slice:
    """State indices k in [K // 10, K]."""
    return slice(steps // 10, steps + 1)


def run_scenario(system: OpinionSystem, schedule: PressureSchedule, steps: int,
                 x0=None, tolerance: float = DEFAULT_TOLERANCE,
                 floor: float = 1e-12, norm: str = "2") -> ScenarioResult:
    traj = simulate(system, schedule, x0=x0, steps=steps)
    report = contraction_report(contraction_constants(system, traj.rho, norm), floor=floor)
    residuals = np.abs(traj.states - traj.limit).max(axis=1)
    final = float(residuals[-1])
    bound = telescoped_bound(traj, report.alphas, norm=norm)
    if norm == "2":
        dist = traj.dist_to_fixed_point
    else:
        dist = np.abs(traj.states[1:] - traj.fixed_points).max(axis=1)
    return ScenarioResult(
        trajectory=traj,
        report=report,
        residuals=residuals,
        residual_floor=float(residuals[tail_window(steps)].min()),
        final_residual=final,
        converged=final < tolerance,
        tolerance=tolerance,
        bound_slack=bound - dist,
    )


def _check_steps(steps: int) -> int:
    steps = int(steps)
    if steps < 100:
        raise ValueError(f"scenarios need at least 100 steps, got {steps}")
    return steps


def run_counterexample(steps: int = 10_000) -> ScenarioResult:
    """K2 with rho_k = 2**sqrt(k): the iterates keep oscillating."""
    return run_scenario(k2_system(), PressureSchedule.exp_sqrt(2.0), _check_steps(steps))


def run_convergent(steps: int = 10_000) -> ScenarioResult:
    """K2 with rho_k = k: the iterates settle on the consensus value."""
    return run_scenario(k2_system(), PressureSchedule.linear(1.0), _check_steps(steps))


@dataclass(frozen=True, eq=False)
class ScalarScenarioResult:
    family: ScalarFamily
    values: np.ndarray
    estimate: float
    fixed_point: float
    converged: bool
    tolerance: float

    def summary(self) -> dict:
        out = {
            "family": self.family.kind,
            "start": self.family.start,
            "steps": int(self.values.size),
            "estimate": self.estimate,
            "fixed_point": self.fixed_point,
            "converged_to_fixed_point": self.converged,
            "tolerance": self.tolerance,
        }
        if self.family.q is not None:
            out["q"] = float(self.family.q)
            out["euler_phi"] = euler_phi(self.family.q)
        return out


def run_scalar_family(family: ScalarFamily, x0: float, K: int,
                      tolerance: float = DEFAULT_TOLERANCE) -> ScalarScenarioResult:
    """Compose the family K times from x0 and compare with the shared fixed point 0."""
    values = scalar_orbit(family, x0, K)
    estimate = float(values[-1]) if values.size else float(x0)
    return ScalarScenarioResult(
        family=family,
        values=values,
        estimate=estimate,
        fixed_point=0.0,
        converged=abs(estimate) < tolerance,
        tolerance=tolerance,
    )
