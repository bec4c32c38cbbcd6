"""One-dimensional map families and Euler's function.

Two families of linear maps with the common fixed point 0:

* ``GeometricGap``: f_k(x) = (1 - q**k) x. The composition converges to
  phi(q) x, which is nonzero for x != 0.
* ``Telescoping``: f_k(x) = ((k - 1) / k) x. Composing f_2..f_K gives x / K.
  Starting at k = 1 multiplies by 0 and sends everything to 0 at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import QOutOfRange

FAMILY_KINDS = ("GeometricGap", "Telescoping")


def euler_phi(q: float, tol: float = 1e-12) -> float:
    """Euler's function prod_{n>=1} (1 - q**n) for 0 <= q < 1.

    Factors are multiplied until the geometric tail sum_{m>n} q**m drops
    below ``tol``; the omitted factors then change the result by less than
    ``tol`` in relative terms.
    """
    q = float(q)
    if not 0.0 <= q < 1.0:
        raise QOutOfRange(f"q must lie in [0, 1), got {q}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    prod = 1.0
    qn = q
    while qn * q / (1.0 - q) >= tol:
        prod *= 1.0 - qn
        qn *= q
    return prod * (1.0 - qn)


@dataclass(frozen=True)
class ScalarFamily:
    kind: str
    q: Optional[float] = None
    start: int = 1

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family {self.kind!r}; expected one of {FAMILY_KINDS}")
        if self.kind == "GeometricGap":
            if self.q is None or not 0.0 < float(self.q) < 1.0:
                raise QOutOfRange(f"GeometricGap needs q in (0, 1), got {self.q}")
        if self.start < 1:
            raise ValueError("start index must be >= 1")

    @classmethod
    def geometric_gap(cls, q: float) -> "ScalarFamily":
        return cls("GeometricGap", q=q)

    @classmethod
    def telescoping(cls, literal: bool = False) -> "ScalarFamily":
        """``literal=True`` includes the zero factor at k = 1."""
        return cls("Telescoping", start=1 if literal else 2)

    def factor(self, k: int) -> float:
        if self.kind == "GeometricGap":
            return 1.0 - float(self.q) ** k
        return (k - 1) / k


def scalar_orbit(family: ScalarFamily, x: float, K: int) -> np.ndarray:
    """Values G_k(x) after each map, for the maps numbered start..K.

    Entry i is the value after map ``start + i``; it is empty when K < start.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    out = np.empty(max(K - family.start + 1, 0))
    value = float(x)
    for i, k in enumerate(range(family.start, K + 1)):
        value = family.factor(k) * value
        out[i] = value
    return out


def scalar_compose(family: ScalarFamily, x: float, K: int) -> float:
    """(f_K o ... o f_start)(x), evaluated by applying each map in turn."""
    orbit = scalar_orbit(family, x, K)
    return float(orbit[-1]) if orbit.size else float(x)
