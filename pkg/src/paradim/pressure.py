"""Pressure of -t log|f'| and the dimension root t = d(c).

Two estimators share one deterministic reduction: leaves are ordered by
itinerary (plus branch first) and summed by adjacent-pair log-sum-exp.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from ._backend import kernels
from .config import DEFAULTS
from .dynamics import classify_parameter
from .errors import (
    BracketError,
    CollisionError,
    DegenerateError,
    DomainError,
    NonHyperbolicError,
)
from .parallel import blocks, ordered_map

PREIMAGE = "preimage"
PERIODIC = "periodic"
METHODS = (PREIMAGE, PERIODIC)

MAX_PREIMAGE_LEVEL = 24
MAX_PERIODIC_LEVEL = 18
CRITICAL_HIT = 1e-14
DUPLICATE_SEP = 1e-12
CLUSTER_SEP = 1e-10
# top of the tree is expanded to this depth; each node is one task
SPLIT_DEPTH = 3
NEWTON_BLOCK = 4096


@dataclass(frozen=True)
class PressureEstimate:
    c: complex
    t: float
    level: int
    value: float
    method: str


@dataclass(frozen=True)
class DimensionResult:
    c: float
    dimension: float
    level: int
    uncertainty: float
    method: str
    residual: float = 0.0
    levels: tuple = ()


@dataclass(frozen=True)
class GibbsEstimate:
    c: float
    t: float
    level: int
    numerator: float
    mass: float
    value: float


def beta_point(c) -> complex:
    """The repelling fixed point (1 + sqrt(1 - 4c)) / 2."""
    return (1 + cmath.sqrt(1 - 4 * complex(c))) / 2


def _split(c, n, z0):
    top = min(n, SPLIT_DEPTH)
    roots, logs, zmin = kernels.tree_leaves(
        complex(c), top, np.array([complex(z0)]), np.zeros(1))
    return top, np.ascontiguousarray(roots), np.ascontiguousarray(logs), zmin


def preimage_pressure(c, t: float, n: int, z0=None, workers: int | None = None) -> PressureEstimate:
    """(1/n) log of the sum of |(f^n)'|^-t over the 2^n preimages of ``z0``."""
    if not 1 <= n <= MAX_PREIMAGE_LEVEL:
        raise DomainError(f"level must be in [1, {MAX_PREIMAGE_LEVEL}]")
    c = complex(c)
    z0 = beta_point(c) if z0 is None else complex(z0)
    top, roots, logs, zmin = _split(c, n, z0)
    depth = n - top

    def job(i):
        return kernels.subtree_lse(c, float(t), depth, roots[i:i + 1], logs[i:i + 1])

    parts = ordered_map(job, range(roots.size), workers)
    zmin = min([zmin] + [p[1] for p in parts])
    if zmin < CRITICAL_HIT:
        raise DegenerateError("a branch passes through the critical point")
    total = kernels.pairwise_lse(np.array([p[0][0] for p in parts]))
    return PressureEstimate(c, float(t), n, total / n, PREIMAGE)


@lru_cache(maxsize=64)
def preimage_leaf_logs(c: complex, n: int, z0: complex | None = None, workers: int | None = None):
    """log|(f^n)'| at every leaf of the preimage tree, in itinerary order."""
    if not 1 <= n <= MAX_PREIMAGE_LEVEL:
        raise DomainError(f"level must be in [1, {MAX_PREIMAGE_LEVEL}]")
    z0 = beta_point(c) if z0 is None else z0
    top, roots, logs, zmin = _split(c, n, z0)
    depth = n - top

    def job(i):
        return kernels.tree_leaves(c, depth, roots[i:i + 1], logs[i:i + 1])

    parts = ordered_map(job, range(roots.size), workers)
    zmin = min([zmin] + [p[2] for p in parts])
    if zmin < CRITICAL_HIT:
        raise DegenerateError("a branch passes through the critical point")
    out = np.concatenate([p[1] for p in parts])
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PeriodicSet:
    """Repelling fixed points of f^n with log|(f^n)'| at each."""
    c: complex
    level: int
    points: np.ndarray
    log_derivative: np.ndarray
    n_attracting: int


def _dedupe(points):
    """Mask keeping the first occurrence of each distinct point."""
    keep = np.zeros(points.size, dtype=bool)
    if points.size == 0:
        return keep
    # coarse pass on a 1e-11 grid, then a neighbour search for the stragglers
    key = np.round(np.column_stack([points.real, points.imag]) * 1e11)
    _, first = np.unique(key, axis=0, return_index=True)
    first.sort()
    keep[first] = True
    idx = np.flatnonzero(keep)
    sub = points[idx]
    tree = cKDTree(np.column_stack([sub.real, sub.imag]))
    pairs = tree.query_pairs(CLUSTER_SEP, output_type="ndarray")
    if pairs.size:
        d = np.abs(sub[pairs[:, 0]] - sub[pairs[:, 1]])
        if np.any(d >= DUPLICATE_SEP):
            raise DegenerateError(
                f"periodic points cluster below {CLUSTER_SEP:g} separation")
        # drop the later itinerary of each coincident pair
        keep[idx[np.maximum(pairs[:, 0], pairs[:, 1])]] = False
    return keep


def _seed_newton(c, n, depth, workers, max_iter):
    top, roots, logs, _ = _split(c, depth, beta_point(c))
    rest = depth - top
    leaves = np.concatenate(ordered_map(
        lambda i: kernels.tree_leaves(c, rest, roots[i:i + 1], logs[i:i + 1])[0],
        range(roots.size), workers))

    def job(span):
        a, b = span
        return kernels.periodic_newton(c, n, np.ascontiguousarray(leaves[a:b]),
                                       max_iter, 1e-15, DEFAULTS.escape_radius)

    parts = ordered_map(job, blocks(leaves.size, NEWTON_BLOCK), workers)
    pts = np.concatenate([p[0] for p in parts])
    lg = np.concatenate([p[1] for p in parts])
    ok = np.concatenate([p[2] for p in parts]) >= 0
    return pts[ok], lg[ok]


@lru_cache(maxsize=64)
def periodic_set(c: complex, n: int, workers: int | None = None,
                 max_iter: int = DEFAULTS.newton_max_iter) -> PeriodicSet:
    """Fix(f^n) by Newton from leaves of the preimage tree of beta.

    Depth-n leaves alone miss some cylinders, so seeding starts one level
    deeper and goes up to three levels deeper until all 2^n roots appear.
    Points are ordered by the first seed that reached them.
    """
    if not 1 <= n <= MAX_PERIODIC_LEVEL:
        raise DomainError(f"level must be in [1, {MAX_PERIODIC_LEVEL}]")
    c = complex(c)
    expected = 1 << n
    pts = np.empty(0, dtype=np.complex128)
    lg = np.empty(0)
    for extra in (1, 2, 3):
        p, l = _seed_newton(c, n, n + extra, workers, max_iter)
        pts = np.concatenate([pts, p])
        lg = np.concatenate([lg, l])
        keep = _dedupe(pts)
        pts, lg = pts[keep], lg[keep]
        if pts.size >= expected:
            break
    if pts.size != expected:
        raise DegenerateError(f"found {pts.size} fixed points of f^{n}, expected {expected}")
    attracting = lg <= 0.0
    pts = pts[~attracting]
    lg = lg[~attracting]
    pts.flags.writeable = False
    lg.flags.writeable = False
    return PeriodicSet(c, n, pts, lg, int(np.count_nonzero(attracting)))


def periodic_pressure(c, t: float, n: int, workers: int | None = None) -> PressureEstimate:
    """(1/n) log of the sum of |(f^n)'|^-t over repelling points of Fix(f^n)."""
    ps = periodic_set(complex(c), n, workers)
    total = kernels.pairwise_lse(np.ascontiguousarray(-float(t) * ps.log_derivative))
    return PressureEstimate(complex(c), float(t), n, total / n, PERIODIC)


def pressure(c, t, n, method=PREIMAGE, workers=None) -> PressureEstimate:
    if method == PREIMAGE:
        logs = preimage_leaf_logs(complex(c), n, None, workers)
        total = kernels.pairwise_lse(np.ascontiguousarray(-float(t) * logs))
        return PressureEstimate(complex(c), float(t), n, total / n, PREIMAGE)
    if method == PERIODIC:
        return periodic_pressure(c, t, n, workers)
    raise DomainError(f"unknown method {method!r}")


def _aitken(v):
    d1 = v[-2] - v[-3]
    d2 = v[-1] - v[-2]
    if d1 == 0 or d2 == 0:
        return v[-1]
    r = d2 / d1
    if not 0 < r < 1:
        return v[-1]
    return v[-1] - d2 * d2 / (d2 - d1)


def _monotone(v):
    d = np.diff(v)
    return bool(np.all(d >= 0) or np.all(d <= 0))


def extrapolate_pressure(estimates, scheme: str = "auto") -> float:
    """Accelerated n -> infinity limit of a pressure sequence.

    ``scheme="richardson"`` removes the C/n term of the preimage estimator
    and applies Aitken to the result when three or more values remain;
    ``"aitken"`` works on the raw sequence. ``"auto"`` picks by method.
    Non-monotone input returns the last value.
    """
    est = list(estimates)
    if len(est) < 2:
        raise DomainError("need at least two levels")
    first = est[0]
    for e in est[1:]:
        if e.method != first.method or e.c != first.c or e.t != first.t:
            raise DomainError("estimates mix methods or parameters")
    est.sort(key=lambda e: e.level)
    levels = np.array([e.level for e in est], dtype=float)
    vals = np.array([e.value for e in est], dtype=float)
    if scheme == "auto":
        scheme = "richardson" if first.method == PREIMAGE else "aitken"
    if not _monotone(vals):
        return float(vals[-1])
    if scheme == "aitken":
        if len(vals) < 3:
            return float(vals[-1])
        return float(_aitken(vals))
    if scheme == "richardson":
        y = levels * vals
        r = np.diff(y) / np.diff(levels)
        if len(r) >= 3 and _monotone(r):
            return float(_aitken(r))
        return float(r[-1])
    raise DomainError(f"unknown scheme {scheme!r}")


def _require_hyperbolic(c):
    cls = classify_parameter(c)
    if not cls.hyperbolic:
        detail = f"escapes after {cls.n_escape} steps" if cls.kind == "escaping" else cls.kind
        raise NonHyperbolicError(f"c={c} is not hyperbolic ({detail}): non-hyperbolic/escaping parameter")
    return cls


def _root(fn, lo, hi):
    flo, fhi = fn(lo), fn(hi)
    if not (flo > 0 > fhi):
        raise BracketError(f"pressure does not change sign on [{lo}, {hi}]: {flo:.3g}, {fhi:.3g}")
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm > 0:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    # secant, kept inside the bracket
    a, fa, b, fb = lo, flo, hi, fhi
    x, fx = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    for _ in range(60):
        if fb == fa:
            break
        x = b - fb * (b - a) / (fb - fa)
        if not lo <= x <= hi:
            x = 0.5 * (lo + hi)
        fx = fn(x)
        if fx > 0:
            lo = x
        else:
            hi = x
        if abs(x - b) < 1e-10 or fx == 0:
            break
        a, fa, b, fb = b, fb, x, fx
    return x, fx


def bowen_dimension(c, levels=DEFAULTS.pressure_levels, method: str = PREIMAGE,
                    bracket=DEFAULTS.bowen_bracket, workers: int | None = None) -> DimensionResult:
    """Zero of the extrapolated pressure t -> P(c, t)."""
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}")
    c = float(c)
    levels = tuple(sorted(int(n) for n in levels))
    if len(levels) < 2:
        raise DomainError("need at least two levels")
    _require_hyperbolic(c)
    cz = complex(c)

    def ext(t, lv):
        return extrapolate_pressure([pressure(cz, t, n, method, workers) for n in lv])

    d, res = _root(lambda t: ext(t, levels), *bracket)
    d_prev, _ = _root(lambda t: ext(t, levels[:-1]), *bracket)
    return DimensionResult(c, float(d), levels[-1], float(abs(d - d_prev)), method,
                           float(abs(res)), levels)


def log_abs_derivative(z):
    return np.log(np.abs(2.0 * z))


def constant_one(z):
    return np.ones(np.shape(z))


def _birkhoff(c, pts, n, g):
    acc = np.zeros(pts.size)
    z = pts.copy()
    for _ in range(n):
        acc += g(z)
        z = z * z + c
    return acc / n


def gibbs_integral(c, t: float, observable, n: int, workers: int | None = None) -> GibbsEstimate:
    """Weighted average of the Birkhoff mean of ``observable`` over Fix(f^n).

    Weights are |(f^n)'|^-t scaled by the largest weight, so ``mass >= 1``.
    """
    if n > 16:
        raise DomainError("gibbs level must be <= 16")
    ps = periodic_set(complex(c), n, workers)
    lw = -float(t) * ps.log_derivative
    w = np.exp(lw - lw.max())
    g = _birkhoff(complex(c), np.array(ps.points), n, observable)
    num = math.fsum(g * w)
    mass = math.fsum(w)
    return GibbsEstimate(float(np.real(c)), float(t), n, num, mass, num / mass)


def _point_velocity(c, pts, n):
    # dz/dc of each fixed point of f^n: (d f^n/dc) / (1 - (f^n)')
    w = pts.copy()
    d = np.ones_like(w)
    dc = np.zeros_like(w)
    for _ in range(n):
        dc = 2 * w * dc + 1
        d = 2 * w * d
        w = w * w + c
    return dc / (1 - d)


def _formula_level(cz, h, n, dimension, workers):
    ps = periodic_set(cz, n, workers)
    base = np.array(ps.points)
    slope = _point_velocity(cz, base, n)
    shifted = []
    for cc, hh in ((cz + h, h), (cz - h, -h)):
        seeds = np.ascontiguousarray(base + hh * slope)
        pts, lg, its = kernels.periodic_newton(cc, n, seeds, 50, 1e-15, DEFAULTS.escape_radius)
        if np.any(its < 0) or np.any(np.abs(pts - seeds) > 1e3 * h * h + 1e-9):
            raise CollisionError(f"periodic points do not continue to c={cc.real}")
        shifted.append(lg)
    dlog = (shifted[0] - shifted[1]) / (2 * h) / n
    lya = ps.log_derivative / n
    lw = -dimension * ps.log_derivative
    w = np.exp(lw - lw.max())
    mass = math.fsum(w)
    num = math.fsum(dlog * w) / mass
    den = math.fsum(lya * w) / mass
    return -dimension * num / den


def derivative_via_formula(c: float, h: float = 1e-6, n=(12, 14, 16),
                           dimension: float | None = None,
                           workers: int | None = None) -> float:
    """d'(c) as -d * <d/dc log|f'|> / <log|f'|> with Gibbs weights at t = d.

    ``n`` is one level or a sequence of levels; with three or more the
    per-level values are Aitken-accelerated like the pressure itself.
    """
    _require_hyperbolic(c)
    if dimension is None:
        dimension = bowen_dimension(c, workers=workers).dimension
    cz = complex(c)
    levels = [n] if isinstance(n, int) else sorted(int(x) for x in n)
    vals = np.array([_formula_level(cz, h, m, dimension, workers) for m in levels])
    if len(vals) >= 3 and _monotone(vals):
        return float(_aitken(vals))
    return float(vals[-1])
