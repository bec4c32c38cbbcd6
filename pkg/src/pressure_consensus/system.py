"""Opinion systems on a weighted graph and the pressure-driven update.

The update for pressure rho is

    x_new = (S + rho D)^{-1} (S x_plus + rho A x_prev)

with S the diagonal of stubbornness coefficients, A the adjacency matrix and
D the diagonal of its row sums. Its fixed point solves (S + rho L) x = S x_plus
with L = D - A.

Row sums and the neighbour sums inside the update are accumulated in plain
left-to-right index order so results are reproducible bit for bit.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import kernels
from .errors import (
    DimensionMismatch,
    DisconnectedGraph,
    NegativeWeight,
    NonfiniteInput,
    NonpositiveRho,
    NonpositiveStubbornness,
    NonSquareMatrix,
    NonzeroDiagonal,
    ScheduleOverflow,
    SingularSystem,
)
from .schedule import PressureSchedule, max_rho

# Normwise backward error accepted from the fixed-point solve.
FIXED_POINT_BACKWARD_TOL = 1e-10


class AsymmetricAdjacencyWarning(UserWarning):
    """The consensus limit formula is only justified for symmetric weights."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


def _ordered_row_sums(adjacency: np.ndarray) -> np.ndarray:
    sums = np.zeros(adjacency.shape[0])
    for j in range(adjacency.shape[1]):
        sums += adjacency[:, j]
    return sums


def _ordered_sum(values: np.ndarray) -> float:
    total = 0.0
    for v in values:
        total += float(v)
    return total


@dataclass(frozen=True, eq=False)
class OpinionSystem:
    """Validated graph/agent model. Build it with :func:`build_system`."""

    adjacency: np.ndarray
    stubbornness: np.ndarray
    preferred: np.ndarray
    row_sums: np.ndarray

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.adjacency, self.adjacency.T))

    def laplacian(self) -> np.ndarray:
        return np.diag(self.row_sums) - self.adjacency

    def with_preferred(self, preferred) -> "OpinionSystem":
        return build_system(self.adjacency, self.stubbornness, preferred)


def build_system(adjacency, stubbornness, preferred) -> OpinionSystem:
    """Validate inputs and return an immutable :class:`OpinionSystem`.

    >>> sys2 = build_system([[0, 1], [1, 0]], [1, 1], [0.1, 0.5])
    >>> sys2.row_sums.tolist()
    [1.0, 1.0]
    """
    try:
        a = np.array(adjacency, dtype=np.float64)
        s = np.array(stubbornness, dtype=np.float64)
        xp = np.array(preferred, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"inputs are not numeric arrays: {exc}") from exc

    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NonSquareMatrix(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
    n = a.shape[0]
    if s.shape != (n,) or xp.shape != (n,):
        raise DimensionMismatch(
            f"adjacency is {n}x{n} but stubbornness has shape {s.shape} "
            f"and preferred has shape {xp.shape}"
        )
    for name, arr in (("adjacency", a), ("stubbornness", s), ("preferred", xp)):
        if not np.all(np.isfinite(arr)):
            raise NonfiniteInput(f"{name} contains non-finite entries")
    if np.any(np.diag(a) != 0.0):
        raise NonzeroDiagonal("self-weights on the adjacency diagonal must be exactly 0")
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise NegativeWeight(f"adjacency[{i}, {j}] = {a[i, j]} is negative")
    if np.any(s <= 0):
        i = int(np.argmax(s <= 0))
        raise NonpositiveStubbornness(f"stubbornness[{i}] = {s[i]} must be > 0")
    ncomp, _ = connected_components(a != 0, directed=True, connection="weak")
    if ncomp != 1:
        raise DisconnectedGraph(f"graph has {ncomp} connected components; consensus needs 1")
    if not np.array_equal(a, a.T):
        warnings.warn(
            "adjacency is not symmetric; the stubbornness-weighted consensus limit "
            "may not describe the long-run behaviour",
            AsymmetricAdjacencyWarning,
            stacklevel=2,
        )
    return OpinionSystem(
        adjacency=_frozen(a),
        stubbornness=_frozen(s),
        preferred=_frozen(xp),
        row_sums=_frozen(_ordered_row_sums(a)),
    )


def as_state(system: OpinionSystem, x) -> np.ndarray:
    """Coerce ``x`` to a length-N float vector with finite entries."""
    arr = np.array(x, dtype=np.float64)
    if arr.shape != (system.n,):
        raise DimensionMismatch(f"state has shape {arr.shape}, expected ({system.n},)")
    if not np.all(np.isfinite(arr)):
        raise NonfiniteInput("state contains non-finite entries")
    return arr


def check_rho(rho) -> float:
    rho = float(rho)
    if np.isnan(rho):
        raise NonfiniteInput("rho is NaN")
    if rho <= 0:
        raise NonpositiveRho(f"rho must be > 0, got {rho}")
    cap = max_rho()
    if not np.isfinite(rho) or rho > cap:
        raise ScheduleOverflow(f"rho = {rho} exceeds the cap {cap:g}")
    return rho


def step(system: OpinionSystem, x_prev, rho: float) -> np.ndarray:
    """One application of the update at pressure ``rho``."""
    rho = check_rho(rho)
    x_prev = as_state(system, x_prev)
    states = kernels.iterate(
        system.adjacency, system.stubbornness, system.preferred, system.row_sums,
        np.array([rho]), x_prev,
    )
    return states[1]


def consensus_limit(system: OpinionSystem) -> np.ndarray:
    """Stubbornness-weighted mean of the preferred states, broadcast to all agents."""
    s = system.stubbornness
    mean = _ordered_sum(s * system.preferred) / _ordered_sum(s)
    return np.full(system.n, mean)


def fixed_points(system: OpinionSystem, rhos) -> np.ndarray:
    """Fixed points of the update for each pressure in ``rhos`` (rows).

    Symmetric systems are solved in a deflated form that stays well
    conditioned as rho grows: writing x = c 1 + w / rho with c the consensus
    value, w solves the bordered system

        [ L + S/rho   S 1 ] [ w ]   [ S (x_plus - c 1) ]
        [ (S 1)^T      0  ] [ l ] = [        0         ]

    Asymmetric systems fall back to a direct solve of (S + rho L) x = S x_plus.
    Every solution is checked for a small normwise backward error.
    """
    rhos = np.atleast_1d(np.asarray(rhos, dtype=np.float64))
    for r in rhos:
        check_rho(r)
    n = system.n
    s = system.stubbornness
    lap = system.laplacian()
    rhs_plain = s * system.preferred
    try:
        if system.symmetric:
            c = consensus_limit(system)[0]
            eps = 1.0 / rhos
            m = rhos.size
            big = np.zeros((m, n + 1, n + 1))
            big[:, :n, :n] = lap[None, :, :] + eps[:, None, None] * np.diag(s)[None, :, :]
            big[:, :n, n] = s
            big[:, n, :n] = s
            rhs = np.zeros((m, n + 1))
            rhs[:, :n] = s * (system.preferred - c)
            sol = np.linalg.solve(big, rhs[:, :, None])[:, :, 0]
            x = c + eps[:, None] * sol[:, :n]
        else:
            mats = np.diag(s)[None, :, :] + rhos[:, None, None] * lap[None, :, :]
            x = np.linalg.solve(mats, np.broadcast_to(rhs_plain, (rhos.size, n))[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"fixed-point solve failed: {exc}") from exc

    if not np.all(np.isfinite(x)):
        raise SingularSystem("fixed-point solve produced non-finite values")
    eta = fixed_point_backward_error(system, rhos, x)
    if np.any(eta > FIXED_POINT_BACKWARD_TOL):
        worst = int(np.argmax(eta))
        raise SingularSystem(
            f"fixed point at rho={rhos[worst]:g} has backward error {eta[worst]:.3g}"
        )
    return x


def fixed_point(system: OpinionSystem, rho: float) -> np.ndarray:
    """Fixed point of the update at a single pressure."""
    return fixed_points(system, [rho])[0]


def fixed_point_residual(system: OpinionSystem, rho: float, x) -> float:
    """||(S + rho L) x - S x_plus||_inf."""
    mat = np.diag(system.stubbornness) + rho * system.laplacian()
    return float(np.max(np.abs(mat @ x - system.stubbornness * system.preferred)))


def fixed_point_backward_error(system: OpinionSystem, rhos, xs) -> np.ndarray:
    """Normwise backward error of candidate fixed points, one per pressure."""
    rhos = np.atleast_1d(np.asarray(rhos, dtype=np.float64))
    xs = np.atleast_2d(xs)
    s = system.stubbornness
    lap = system.laplacian()
    rhs = s * system.preferred
    mats = np.diag(s)[None, :, :] + rhos[:, None, None] * lap[None, :, :]
    resid = np.abs(np.einsum("kij,kj->ki", mats, xs) - rhs).max(axis=1)
    mat_norm = np.abs(mats).sum(axis=2).max(axis=1)
    scale = mat_norm * np.abs(xs).max(axis=1) + np.abs(rhs).max()
    with np.errstate(invalid="ignore", divide="ignore"):
        eta = np.where(scale > 0, resid / scale, resid)
    return eta


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States of an iteration plus per-step diagnostics.

    ``states[0]`` is the initial condition; the per-step arrays are indexed
    from step k = 1 at position 0.
    """

    states: np.ndarray
    rho: np.ndarray
    fixed_points: np.ndarray
    dist_to_limit: np.ndarray
    dist_to_fixed_point: np.ndarray
    limit: np.ndarray

    @property
    def steps(self) -> int:
        return self.rho.shape[0]


def simulate(
    system: OpinionSystem,
    schedule: PressureSchedule,
    x0=None,
    steps: int = 1,
) -> Trajectory:
    """Iterate the update with rho_k = schedule(k) for k = 1..steps.

    ``x0`` defaults to the preferred states.
    """
    steps = int(steps)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    x0 = system.preferred.copy() if x0 is None else as_state(system, x0)
    rhos = schedule.values(steps)
    states = kernels.iterate(
        system.adjacency, system.stubbornness, system.preferred, system.row_sums, rhos, x0
    )
    if not np.all(np.isfinite(states)):
        raise SingularSystem("iteration produced non-finite states")
    fps = fixed_points(system, rhos)
    limit = consensus_limit(system)
    return Trajectory(
        states=states,
        rho=rhos,
        fixed_points=fps,
        dist_to_limit=np.linalg.norm(states[1:] - limit, axis=1),
        dist_to_fixed_point=np.linalg.norm(states[1:] - fps, axis=1),
        limit=limit,
    )
