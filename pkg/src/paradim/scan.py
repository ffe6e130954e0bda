"""Derivative scans toward a parabolic parameter and the one-sided dimension limit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS
from .errors import DomainError, SolverError
from .parallel import ordered_map
from .pressure import _aitken, bowen_dimension
from .special import ScalingFit, classify_regime, fd_derivative, scaling_fit

PETALS = {-0.75: 2, -1.25: 2, 0.25: 1}


@dataclass(frozen=True)
class ScanRow:
    c: float
    dimension: float
    dprime: float


@dataclass(frozen=True)
class ScanResult:
    c0: float
    side: str
    petals: int
    d_limit: float
    rows: tuple
    fit: ScalingFit | None
    predicted_exponent: float | None
    regime: str


def _side_sign(side: str) -> int:
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    return -1 if side == "left" else 1


def distances(decades: int = 2, per_decade: int = 3, start: float = 1e-4):
    """Geometric grid of |c - c0| from start*10^decades down to start, largest first."""
    if decades < 1 or per_decade < 1 or not start > 0:
        raise DomainError("need decades >= 1, per_decade >= 1, start > 0")
    count = decades * per_decade + 1
    return [float(start * 10 ** (decades - i / per_decade)) for i in range(count)]


def _default_dimension(levels, method):
    def dim(c):
        return bowen_dimension(c, levels=levels, method=method).dimension
    return dim


def dimension_limit(c0: float, side: str, levels=DEFAULTS.pressure_levels,
                    method: str = "preimage", radii=(1e-2, 5e-3, 2.5e-3, 1.25e-3),
                    dimension_fn=None) -> float:
    """One-sided limit of the dimension at c0 from a halving sequence of offsets.

    The last three values are Aitken-accelerated when their differences
    shrink geometrically; otherwise the closest sample is returned.
    """
    s = _side_sign(side)
    dim = dimension_fn or _default_dimension(levels, method)
    vals = [dim(c0 + s * r) for r in radii]
    return _aitken(vals)


def derivative_scan(c0: float, side: str, decades: int = 2, per_decade: int = 3,
                    start: float = 1e-4, levels=DEFAULTS.pressure_levels,
                    method: str = "preimage", petals: int | None = None,
                    workers: int | None = None, d_limit: float | None = None,
                    dimension_fn=None) -> ScanResult:
    """Sample d'(c) on a geometric grid approaching c0 from one side and fit the exponent."""
    s = _side_sign(side)
    if petals is None:
        if c0 not in PETALS:
            raise DomainError("unknown parabolic parameter; pass the petal count")
        petals = PETALS[c0]
    dist = distances(decades, per_decade, start)
    dim = dimension_fn or _default_dimension(levels, method)

    def one(r):
        c = c0 + s * r
        # stay on one side of c0: the outer difference reaches c +- r/4
        return ScanRow(c=c, dimension=dim(c), dprime=fd_derivative(dim, c, r / 4))

    rows = tuple(ordered_map(one, dist, workers))
    if d_limit is None:
        d_limit = dimension_limit(c0, side, levels, method, dimension_fn=dim)
    regime, predicted = classify_regime(d_limit, petals=petals)
    try:
        fit = scaling_fit([(r.c, r.dprime) for r in rows], c0)
    except SolverError:
        fit = None
    return ScanResult(c0=c0, side=side, petals=petals, d_limit=d_limit, rows=rows,
                      fit=fit, predicted_exponent=predicted, regime=regime)


def scan_table(result: ScanResult):
    return [(r.c, r.dimension, r.dprime) for r in result.rows]


def exponent_gap(result: ScanResult) -> float:
    if result.fit is None or result.predicted_exponent is None:
        return float("inf")
    return abs(result.fit.exponent - result.predicted_exponent)


def signs(result: ScanResult):
    return np.sign([r.dprime for r in result.rows])
