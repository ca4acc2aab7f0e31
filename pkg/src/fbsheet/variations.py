"""Hermite variation statistics of an increment field: the raw double sum V,
its normalized version, and the two-parameter partial-sum process.

Everything is computed from the normalized increments (never from a
reconstructed sheet) so no catastrophic cancellation enters at large grids.
Reductions use numpy's pairwise summation in a fixed order, so repeated runs
agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import _order_value, hermite
from .normalization import Regime, classify_regime, phi
from .simulator import IncrementField

__all__ = [
    "VariationReport",
    "hermite_variation",
    "normalized_variation",
    "partial_sum_process",
]


@dataclass(frozen=True)
class VariationReport:
    """Raw and normalized variation of one field, with the normalization used.

    tildeV = phi_used * N^{-alpha q} * M^{-beta q} * V holds exactly.
    """

    V: float
    tildeV: float
    phi_used: float
    regime: Regime
    N: int
    M: int
    q: int


def hermite_variation(field: IncrementField, q) -> float:
    """Plain double sum of H_q over all entries of the field."""
    return float(np.sum(hermite(q, field.data)))


def _normalizer(field: IncrementField, q: int) -> float:
    f = phi(field.alpha, field.beta, q, field.N, field.M)
    return f * float(field.N) ** (-field.alpha * q) * float(field.M) ** (-field.beta * q)


def normalized_variation(field: IncrementField, q) -> VariationReport:
    """Normalized Hermite variation; its second moment tends to 1 with the grid."""
    qi = _order_value(q)
    v = hermite_variation(field, qi)
    f = phi(field.alpha, field.beta, qi, field.N, field.M)
    scale = float(field.N) ** (-field.alpha * qi) * float(field.M) ** (-field.beta * qi)
    return VariationReport(
        V=v,
        tildeV=f * scale * v,
        phi_used=f,
        regime=classify_regime(field.alpha, field.beta, qi),
        N=field.N,
        M=field.M,
        q=qi,
    )


def partial_sum_process(field: IncrementField, q, points) -> list[float]:
    """Normalized partial sums over i <= floor((N-1)t), j <= floor((M-1)s).

    Index ranges follow the two-parameter partial-sum kernel literally, so the
    first row/column is included even at t = 0 or s = 0 and the process does
    not vanish on the axes (unlike the sheet itself).  At (1, 1) the value
    equals the normalized variation.
    """
    qi = _order_value(q)
    h = hermite(qi, field.data)
    scale = _normalizer(field, qi)
    out = []
    for t, s in points:
        if not (0.0 <= t <= 1.0 and 0.0 <= s <= 1.0):
            raise ValueError(f"evaluation points must lie in [0,1]^2, got {(t, s)}")
        i_hi = math.floor((field.N - 1) * t)
        j_hi = math.floor((field.M - 1) * s)
        out.append(scale * float(np.sum(h[: i_hi + 1, : j_hi + 1])))
    return out
