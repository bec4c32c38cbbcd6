"""Peer-pressure schedules k -> rho_k."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidSchedule, NonpositiveRho, ScheduleOverflow

DEFAULT_MAX_RHO = 1e300
MAX_RHO_ENV = "PRESSURE_CONSENSUS_MAX_RHO"

KINDS = ("Linear", "Power", "ExpSqrt", "Constant", "Table")

_PARAM_NAMES = {
    "Linear": ("slope",),
    "Power": ("exponent",),
    "ExpSqrt": ("base",),
    "Constant": ("value",),
    "Table": ("values",),
}


def max_rho() -> float:
    """Overflow cap on rho, overridable through the environment."""
    raw = os.environ.get(MAX_RHO_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_MAX_RHO
    try:
        cap = float(raw)
    except ValueError as exc:
        raise InvalidSchedule(f"{MAX_RHO_ENV}={raw!r} is not a number") from exc
    if not cap > 0:
        raise InvalidSchedule(f"{MAX_RHO_ENV} must be positive, got {raw!r}")
    return cap


@dataclass(frozen=True)
class PressureSchedule:
    """A pure map from step index k >= 1 to a positive pressure rho_k.

    ``Linear``: rho_k = slope * k. ``Power``: rho_k = k ** exponent.
    ``ExpSqrt``: rho_k = base ** sqrt(k). ``Constant``: rho_k = value.
    ``Table``: rho_k = values[k - 1], repeating the last entry past the end.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSchedule(f"unknown schedule kind {self.kind!r}; expected one of {KINDS}")
        expected = set(_PARAM_NAMES[self.kind])
        got = set(self.params)
        if got != expected:
            raise InvalidSchedule(
                f"{self.kind} schedule takes params {sorted(expected)}, got {sorted(got)}"
            )
        if self.kind == "Table":
            values = self.params["values"]
            if isinstance(values, (str, bytes)) or not isinstance(values, Sequence) or len(values) == 0:
                raise InvalidSchedule("Table schedule needs a non-empty list of values")
            vals = tuple(float(v) for v in values)
            if not all(math.isfinite(v) and v > 0 for v in vals):
                raise NonpositiveRho("Table schedule values must be finite and > 0")
            object.__setattr__(self, "params", {"values": vals})
            return
        (name,) = _PARAM_NAMES[self.kind]
        value = self.params[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidSchedule(f"{self.kind}.{name} must be a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise InvalidSchedule(f"{self.kind}.{name} must be finite")
        if self.kind in ("Linear", "ExpSqrt", "Constant") and value <= 0:
            raise NonpositiveRho(f"{self.kind}.{name} must be > 0, got {value}")
        object.__setattr__(self, "params", {name: value})

    # Convenience constructors -------------------------------------------------
    @classmethod
    def linear(cls, slope: float = 1.0) -> "PressureSchedule":
        return cls("Linear", {"slope": slope})

    @classmethod
    def power(cls, exponent: float) -> "PressureSchedule":
        return cls("Power", {"exponent": exponent})

    @classmethod
    def exp_sqrt(cls, base: float = 2.0) -> "PressureSchedule":
        return cls("ExpSqrt", {"base": base})

    @classmethod
    def constant(cls, value: float) -> "PressureSchedule":
        return cls("Constant", {"value": value})

    @classmethod
    def table(cls, values: Sequence[float]) -> "PressureSchedule":
        return cls("Table", {"values": list(values)})

    # Evaluation ---------------------------------------------------------------
    def __call__(self, k: int) -> float:
        return float(self.values(int(k), start=int(k))[0])

    def values(self, n: int, start: int = 1) -> np.ndarray:
        """rho_k for k = start .. n as a float64 array.

        Raises ScheduleOverflow if any value is non-finite or above the cap.
        """
        if start < 1:
            raise InvalidSchedule(f"schedule is defined for k >= 1, got k={start}")
        if n < start:
            return np.empty(0)
        k = np.arange(start, n + 1, dtype=np.float64)
        p = self.params
        with np.errstate(over="ignore", invalid="ignore"):
            if self.kind == "Linear":
                rho = p["slope"] * k
            elif self.kind == "Power":
                rho = k ** p["exponent"]
            elif self.kind == "ExpSqrt":
                rho = p["base"] ** np.sqrt(k)
            elif self.kind == "Constant":
                rho = np.full(k.shape, p["value"])
            else:
                table = np.asarray(p["values"], dtype=np.float64)
                idx = np.minimum(k.astype(np.int64), table.size) - 1
                rho = table[idx]
        cap = max_rho()
        bad = ~np.isfinite(rho) | (rho > cap)
        if bad.any():
            first = int(k[np.argmax(bad)])
            raise ScheduleOverflow(f"rho_{first} = {rho[np.argmax(bad)]} exceeds the cap {cap:g}")
        if np.any(rho <= 0):
            first = int(k[np.argmax(rho <= 0)])
            raise NonpositiveRho(f"rho_{first} is not positive")
        return rho

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.kind == "Table":
            params["values"] = list(params["values"])
        return {"kind": self.kind, "params": params}
