"""Scenario configuration files and report serializers.

Config files are JSON objects::

    {
      "system": {"adjacency": [[0, 1], [1, 0]],
                 "stubbornness": [1, 1],
                 "preferred": [0.1, 0.5]},
      "schedule": {"kind": "ExpSqrt", "params": {"base": 2}},
      "steps": 10000,
      "x0": null,
      "tolerance": 0.001
    }

``x0`` and ``tolerance`` are optional. Unknown keys are rejected at every
level.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .contraction import ContractionReport
from .errors import ConfigError
from .schedule import PressureSchedule
from .system import OpinionSystem, Trajectory, as_state, build_system

DEFAULT_TOLERANCE = 1e-3

_TOP_KEYS = {"system", "schedule", "steps"}
_TOP_OPTIONAL = {"x0", "tolerance"}
_SYSTEM_KEYS = {"adjacency", "stubbornness", "preferred"}
_SCHEDULE_KEYS = {"kind", "params"}


def _check_keys(obj, required, optional, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(obj) - required - optional
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"missing field(s) in {where}: {sorted(missing)}")


def _float_list(value, where):
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{where} must be a list of numbers")
    return [float(v) for v in value]


@dataclass(frozen=True)
class ScenarioConfig:
    adjacency: tuple
    stubbornness: tuple
    preferred: tuple
    schedule: PressureSchedule
    steps: int
    x0: Optional[tuple] = None
    tolerance: float = DEFAULT_TOLERANCE

    @classmethod
    def from_dict(cls, data) -> "ScenarioConfig":
        _check_keys(data, _TOP_KEYS, _TOP_OPTIONAL, "config")
        sysd = data["system"]
        _check_keys(sysd, _SYSTEM_KEYS, set(), "system")
        adj = sysd["adjacency"]
        if not isinstance(adj, list):
            raise ConfigError("system.adjacency must be a list of rows")
        adjacency = tuple(tuple(_float_list(row, "system.adjacency row")) for row in adj)
        stub = tuple(_float_list(sysd["stubbornness"], "system.stubbornness"))
        pref = tuple(_float_list(sysd["preferred"], "system.preferred"))

        sched = data["schedule"]
        _check_keys(sched, _SCHEDULE_KEYS, set(), "schedule")
        if not isinstance(sched["params"], dict):
            raise ConfigError("schedule.params must be a JSON object")
        schedule = PressureSchedule(sched["kind"], dict(sched["params"]))

        steps = data["steps"]
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise ConfigError(f"steps must be a positive integer, got {steps!r}")
        x0 = data.get("x0")
        if x0 is not None:
            x0 = tuple(_float_list(x0, "x0"))
        tol = data.get("tolerance", DEFAULT_TOLERANCE)
        if tol is None:
            tol = DEFAULT_TOLERANCE
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
            raise ConfigError(f"tolerance must be a positive number, got {tol!r}")
        config = cls(adjacency, stub, pref, schedule, steps, x0, float(tol))
        # Validate eagerly so a bad config never reaches the numerics.
        system = config.system()
        if x0 is not None:
            as_state(system, x0)
        return config

    def to_dict(self) -> dict:
        return {
            "system": {
                "adjacency": [list(r) for r in self.adjacency],
                "stubbornness": list(self.stubbornness),
                "preferred": list(self.preferred),
            },
            "schedule": self.schedule.to_dict(),
            "steps": self.steps,
            "x0": None if self.x0 is None else list(self.x0),
            "tolerance": self.tolerance,
        }

    def system(self) -> OpinionSystem:
        return build_system(self.adjacency, self.stubbornness, self.preferred)


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ScenarioConfig.from_dict(data)


def dump_config(config: ScenarioConfig, path) -> None:
    write_json(config.to_dict(), path)


def fmt(value: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(value), ".17g")


def csv_header(n: int) -> list:
    return (["k", "rho"] + [f"x_{i}" for i in range(n)]
            + ["alpha", "partial_product", "dist_to_fixed_point", "dist_to_limit"])


def write_trajectory_csv(path, trajectory: Trajectory, report: ContractionReport) -> None:
    """One row per state. Step-only columns are blank on the k = 0 row,
    except ``partial_product`` which holds the empty product 1."""
    states = trajectory.states
    n = states.shape[1]
    dist0 = float(np.linalg.norm(states[0] - trajectory.limit))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(n))
        writer.writerow(["0", ""] + [fmt(v) for v in states[0]] + ["", fmt(1.0), "", fmt(dist0)])
        for k in range(1, trajectory.steps + 1):
            writer.writerow(
                [str(k), fmt(trajectory.rho[k - 1])]
                + [fmt(v) for v in states[k]]
                + [
                    fmt(report.alphas[k - 1]),
                    fmt(report.partial_products[k - 1]),
                    fmt(trajectory.dist_to_fixed_point[k - 1]),
                    fmt(trajectory.dist_to_limit[k - 1]),
                ]
            )


def read_trajectory_csv(path) -> dict:
    """Parse a trajectory CSV back into float columns (blank cells -> NaN)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in body:
        for name, cell in zip(header, row):
            cols[name].append(float(cell) if cell else float("nan"))
    return {name: np.array(vals) for name, vals in cols.items()}


def write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
