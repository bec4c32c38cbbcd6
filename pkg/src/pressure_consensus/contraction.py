"""Contraction constants of the pressure update and products of them.

For a fixed pressure the update is affine, f(x) - x* = M (x - x*) with
M = (S + rho D)^{-1} rho A, so the tightest x-independent constant in
||f(x) - x*|| <= alpha ||x - x*|| is the operator norm of M. Whether the
composed iteration reaches consensus hinges on the running product of these
constants tending to zero.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import kernels
from .errors import AlphaOutOfRange, AtFixedPoint, NormIterationDiverged
from .schedule import PressureSchedule
from .system import OpinionSystem, Trajectory, as_state, check_rho, fixed_point, step

DENSE_FALLBACK_MAX_N = 64
STALL_TOL = 1e-12

AlphaSource = Union[Sequence[float], np.ndarray, Callable[[int], float]]


class Classification(str, enum.Enum):
    VANISHES_NUMERICALLY = "VanishesNumerically"
    POSITIVE_LIMIT_SUSPECTED = "PositiveLimitSuspected"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


def iteration_matrix(system: OpinionSystem, rho: float) -> np.ndarray:
    """M(rho) with entries rho A_ij / (s_i + rho d_i)."""
    rho = check_rho(rho)
    scale = kernels.row_scales(system.stubbornness, system.row_sums, [rho])[0]
    return scale[:, None] * system.adjacency


def contraction_constants(system: OpinionSystem, rhos, norm: str = "2") -> np.ndarray:
    """Operator norm of M(rho) for each pressure in ``rhos``.

    ``norm="2"`` (default) is the largest singular value. It is below 1 for
    regular graphs with uniform stubbornness but can exceed 1 on irregular
    graphs, where M is not symmetric. ``norm="inf"`` is the max row sum,
    which is always below 1.
    """
    rhos = np.atleast_1d(np.asarray(rhos, dtype=np.float64))
    for r in rhos:
        check_rho(r)
    if norm == "inf":
        scales = kernels.row_scales(system.stubbornness, system.row_sums, rhos)
        return (scales * system.row_sums[None, :]).max(axis=1)
    if norm != "2":
        raise ValueError(f"norm must be '2' or 'inf', got {norm!r}")
    sigmas, converged = kernels.spectral_norms(
        system.adjacency, system.stubbornness, system.row_sums, rhos
    )
    stuck = np.flatnonzero(~converged)
    if stuck.size:
        if system.n > DENSE_FALLBACK_MAX_N:
            raise NormIterationDiverged(
                f"power iteration did not converge for {stuck.size} pressure value(s)"
            )
        for idx in stuck:
            sigmas[idx] = np.linalg.norm(iteration_matrix(system, rhos[idx]), 2)
    return sigmas


def contraction_constant(system: OpinionSystem, rho: float, norm: str = "2") -> float:
    """Largest singular value of the iteration matrix at pressure ``rho``."""
    return float(contraction_constants(system, [rho], norm)[0])


def max_row_sum_constant(system: OpinionSystem, rho: float) -> float:
    """Infinity-norm alternative: max_i rho d_i / (s_i + rho d_i)."""
    return contraction_constant(system, rho, norm="inf")


def _as_alphas(alphas: AlphaSource, n: int | None = None) -> np.ndarray:
    if callable(alphas):
        if n is None:
            raise ValueError("a count is required when alphas is a callable")
        arr = np.array([alphas(k) for k in range(1, n + 1)], dtype=np.float64)
    else:
        arr = np.asarray(alphas, dtype=np.float64).ravel()
        if n is not None:
            if n > arr.size:
                raise ValueError(f"asked for {n} factors but only {arr.size} were given")
            arr = arr[:n]
    if arr.size == 0:
        raise ValueError("need at least one contraction constant")
    # Exactly 1.0 is admitted: for large pressures rho/(1+rho) rounds there.
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    if bad.any():
        k = int(np.argmax(bad)) + 1
        hint = " (2-norm constants can exceed 1 on irregular graphs; try norm='inf')" if arr[k - 1] > 1 else ""
        raise AlphaOutOfRange(f"alpha_{k} = {arr[k - 1]} is outside [0, 1){hint}")
    return arr


def log_partial_sums(alphas: AlphaSource, n: int | None = None) -> np.ndarray:
    """sum_{k<=N} ln alpha_k for every N, accumulated with k ascending."""
    arr = _as_alphas(alphas, n)
    with np.errstate(divide="ignore"):
        logs = np.log(arr)
    return kernels.compensated_cumsum(logs)


def _exp_products(log_sums: np.ndarray) -> np.ndarray:
    prods = np.exp(log_sums)
    # Keep "exactly zero" reserved for an exact zero factor.
    tiny = np.nextafter(0.0, 1.0)
    return np.where(np.isneginf(log_sums), 0.0, np.maximum(prods, tiny))


def partial_products(alphas: AlphaSource, n: int | None = None) -> np.ndarray:
    return _exp_products(log_partial_sums(alphas, n))


def partial_product(alphas: AlphaSource, n: int | None = None) -> float:
    """prod_{k=1..n} alpha_k evaluated through a compensated log-sum.

    >>> round(partial_product([k / (k + 1) for k in range(1, 10)]), 12)
    0.1
    """
    return float(partial_products(alphas, n)[-1])


@dataclass(frozen=True, eq=False)
class ContractionReport:
    """Running products of contraction constants and their classification."""

    alphas: np.ndarray
    partial_products: np.ndarray
    log_sums: np.ndarray
    tail_sums: np.ndarray
    classification: Classification
    floor: float

    @property
    def log_sum(self) -> float:
        return float(self.log_sums[-1])

    @property
    def tail_estimate(self) -> float:
        return float(self.tail_sums[-1])

    @property
    def partial_product_final(self) -> float:
        return float(self.partial_products[-1])

    def summary(self) -> dict:
        a = self.alphas
        return {
            "alphas_summary": {
                "count": int(a.size),
                "first": float(a[0]),
                "last": float(a[-1]),
                "min": float(a.min()),
                "max": float(a.max()),
                "mean": float(a.mean()),
            },
            "partial_product_final": self.partial_product_final,
            "log_sum": self.log_sum,
            "classification": self.classification.value,
            "tail_estimate": self.tail_estimate,
            "floor": self.floor,
        }


def _classify(log_sums, tail_sums, floor) -> Classification:
    if np.any(log_sums < np.log(floor)):
        return Classification.VANISHES_NUMERICALLY
    n = tail_sums.size
    window = n // 10
    if window >= 1:
        increment = tail_sums[-1] - tail_sums[n - 1 - window]
        if increment < STALL_TOL:
            return Classification.POSITIVE_LIMIT_SUSPECTED
    return Classification.INCONCLUSIVE


def contraction_report(alphas: AlphaSource, n: int | None = None, floor: float = 1e-12) -> ContractionReport:
    """Build the full report for the first ``n`` contraction constants.

    The product counts as vanishing once its logarithm drops below
    ln(floor). It is flagged as having a positive limit when the divergence
    witness sum(1 - alpha_k) gains less than 1e-12 over the last tenth of
    the terms. Both labels are heuristics; the raw series are kept.
    """
    if not 0.0 < floor < 1.0:
        raise ValueError(f"floor must lie in (0, 1), got {floor}")
    arr = _as_alphas(alphas, n)
    with np.errstate(divide="ignore"):
        log_sums = kernels.compensated_cumsum(np.log(arr))
    tail_sums = kernels.compensated_cumsum(1.0 - arr)
    return ContractionReport(
        alphas=arr,
        partial_products=_exp_products(log_sums),
        log_sums=log_sums,
        tail_sums=tail_sums,
        classification=_classify(log_sums, tail_sums, floor),
        floor=floor,
    )


def classify_product(alphas: AlphaSource, n_max: int, floor: float = 1e-12) -> Classification:
    if n_max < 10:
        raise ValueError(f"n_max must be >= 10, got {n_max}")
    return contraction_report(alphas, n_max, floor).classification


def schedule_report(system: OpinionSystem, schedule: PressureSchedule, n: int,
                    floor: float = 1e-12, norm: str = "2") -> ContractionReport:
    """Contraction report for ``system`` driven by ``schedule`` for ``n`` steps."""
    return contraction_report(contraction_constants(system, schedule.values(n), norm), floor=floor)


def telescoped_bound(trajectory: Trajectory, alphas, first_term: str = "initial",
                     norm: str = "2") -> np.ndarray:
    """Upper bound on ||x_k - x_k*||_2 for k = 1..K obtained by unrolling
    the one-step contraction estimate and the triangle inequality.

    With ``first_term="initial"`` the leading term is
    (prod_{i<=k} alpha_i) ||x_0 - x_1*||, which is what the recursion
    actually yields. ``first_term="first_iterate"`` uses ||x_1 - x_1*|| in
    its place; that variant is not a valid bound at k = 1 and is kept only
    for comparison. ``norm`` must match the norm the constants were
    computed in.
    """
    ord_ = {"2": None, "inf": np.inf}[norm]
    alphas = np.asarray(alphas, dtype=np.float64)
    fps = trajectory.fixed_points
    k_total = trajectory.steps
    if alphas.shape != (k_total,):
        raise ValueError(f"need {k_total} contraction constants, got shape {alphas.shape}")
    if first_term == "initial":
        lead = np.linalg.norm(trajectory.states[0] - fps[0], ord_)
    elif first_term == "first_iterate":
        lead = np.linalg.norm(trajectory.states[1] - fps[0], ord_)
    else:
        raise ValueError(f"unknown first_term {first_term!r}")
    drift = np.linalg.norm(np.diff(fps, axis=0), ord_, axis=1)
    bound = np.empty(k_total)
    bound[0] = alphas[0] * lead
    for k in range(1, k_total):
        bound[k] = alphas[k] * (bound[k - 1] + drift[k - 1])
    return bound


def norm_ratio(system: OpinionSystem, rho: float, x) -> float:
    """||f(x) - x*||_2 / ||x - x*||_2 for the update at pressure ``rho``."""
    x = as_state(system, x)
    target = fixed_point(system, rho)
    denom = np.linalg.norm(x - target)
    if denom == 0.0:
        raise AtFixedPoint("x coincides with the fixed point; the ratio is undefined")
    return float(np.linalg.norm(step(system, x, rho) - target) / denom)
