"""Iteration, cycles and parameter classification for z -> z**2 + c.

All complex quantities are Python ``complex``. Functions are pure and
their results are immutable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .config import DEFAULTS
from .errors import (
    BracketError,
    CollisionError,
    ConvergenceError,
    DomainError,
    EscapeError,
    MinimalityError,
)

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class Orbit:
    start: complex
    values: tuple
    log_derivative: float
    derivative: complex


@dataclass(frozen=True)
class Cycle:
    c: complex
    period: int
    points: tuple
    multiplier: complex


@dataclass(frozen=True)
class Classification:
    kind: str  # "escaping" | "attracting" | "undetermined"
    n_escape: int | None = None
    period: int | None = None
    multiplier: complex | None = None

    @property
    def hyperbolic(self) -> bool:
        return self.kind == "attracting"


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def iterate(c, z0, n: int, escape_radius: float = DEFAULTS.escape_radius) -> Orbit:
    """Orbit of length ``n + 1`` with chain-rule derivative accumulators."""
    if n < 0:
        raise DomainError("n must be non-negative")
    c = complex(c)
    z = complex(z0)
    if not (_finite(c) and _finite(z)):
        raise DomainError("non-finite input")
    values = [z]
    deriv = 1 + 0j
    logd = 0.0
    for j in range(n):
        deriv *= 2 * z
        a = abs(2 * z)
        logd += math.log(a) if a > 0 else -math.inf
        z = z * z + c
        if not _finite(z) or abs(z) > escape_radius:
            raise EscapeError(j + 1, z)
        values.append(z)
    return Orbit(complex(z0), tuple(values), logd, deriv)


def orbit_jet(c, z, k: int):
    """Value of f^k at z with d/dz, d2/dz2, d/dc and d2/(dz dc)."""
    w, d, d2, dc, dzc = complex(z), 1 + 0j, 0j, 0j, 0j
    for _ in range(k):
        # order matters: every update uses the previous w
        dzc = 2 * (dc * d + w * dzc)
        d2 = 2 * d * d + 2 * w * d2
        dc = 2 * w * dc + 1
        d = 2 * w * d
        w = w * w + c
    return w, d, d2, dc, dzc


def _divisors(k: int):
    return [d for d in range(1, k) if k % d == 0]


def _newton_periodic(c, k, z, max_iter, tol=1e-15):
    for _ in range(max_iter):
        w, d, _, _, _ = orbit_jet(c, z, k)
        if not _finite(w) or abs(w) > DEFAULTS.escape_radius:
            return None
        g = d - 1
        if g == 0:
            return None
        step = (w - z) / g
        z = z - step
        if abs(step) <= tol * (1 + abs(z)):
            # one more step to settle the last bits
            w, d, _, _, _ = orbit_jet(c, z, k)
            if d != 1:
                z = z - (w - z) / (d - 1)
            return z
    w = orbit_jet(c, z, k)[0]
    if abs(w - z) <= RESIDUAL_TOL:
        return z
    return None


def cycle_from_point(c, k: int, z) -> Cycle:
    c = complex(c)
    pts = [complex(z)]
    mult = 1 + 0j
    for _ in range(k - 1):
        mult *= 2 * pts[-1]
        pts.append(pts[-1] ** 2 + c)
    mult *= 2 * pts[-1]
    return Cycle(c, k, tuple(pts), mult)


def _check_cycle(c, k, z):
    res = abs(orbit_jet(c, z, k)[0] - z)
    if res > RESIDUAL_TOL * max(1.0, abs(z)):
        raise ConvergenceError(f"cycle residual {res:.2e} above tolerance")
    for d in _divisors(k):
        if abs(orbit_jet(c, z, d)[0] - z) <= 1e-9:
            raise MinimalityError(f"orbit has period {d}, not {k}")


def find_cycle(c, k: int, seed, max_iter: int = DEFAULTS.newton_max_iter,
               retries: int = 3) -> Cycle:
    """Newton on f^k(z) - z from ``seed``, with minimal-period verification."""
    if k < 1:
        raise DomainError("period must be >= 1")
    c = complex(c)
    seed = complex(seed)
    last: Exception = ConvergenceError(f"Newton did not converge in {max_iter} steps")
    for attempt in range(retries + 1):
        s = seed if attempt == 0 else seed * (1 + 0.05 * attempt * cmath.exp(1j * attempt))
        z = _newton_periodic(c, k, s, max_iter)
        if z is None:
            continue
        try:
            _check_cycle(c, k, z)
        except (ConvergenceError, MinimalityError) as exc:
            last = exc
            continue
        return cycle_from_point(c, k, z)
    raise last


def _tangent(c, k, z):
    _, d, _, dc, _ = orbit_jet(c, z, k)
    if d == 1:
        return None
    return dc / (1 - d)


def continue_cycle(cycle: Cycle, c_from, c_to, steps: int,
                   max_iter: int = DEFAULTS.newton_max_iter) -> Cycle:
    """Track ``cycle`` from ``c_from`` to ``c_to`` by predictor-corrector Newton."""
    if steps < 1:
        raise DomainError("steps must be >= 1")
    c_from, c_to = complex(c_from), complex(c_to)
    k = cycle.period
    z = cycle.points[0]
    base = (c_to - c_from) / steps
    floor = abs(base) * 2.0 ** -30
    c = c_from
    h = base
    while abs(c_to - c) > 0:
        if abs(c_to - c) < abs(h):
            h = c_to - c
        cn = c + h
        tan = _tangent(c, k, z)
        pred = z + tan * h if tan is not None else z
        znew = _newton_periodic(cn, k, pred, max_iter)
        ok = znew is not None and abs(znew - z) <= 10 * abs(h)
        if ok:
            try:
                _check_cycle(cn, k, znew)
            except (ConvergenceError, MinimalityError):
                ok = False
        if not ok:
            h = h / 2
            if abs(h) < floor:
                raise CollisionError(
                    f"cycle collision near c={c.real:.6g}{c.imag:+.6g}j", at=c)
            continue
        c, z = cn, znew
        if abs(h) < abs(base):
            h = h * 2
    return cycle_from_point(c_to, k, z)


_PARABOLIC_SEEDS = {
    (1, -1): (-0.5, -0.7),
    (1, 1): (0.5, 0.2),
    (2, -1): ((-1 + math.sqrt(2)) / 2, -1.2),
}
_PARABOLIC_BRACKETS = {1: (-0.8, 0.3), 2: (-1.3, -0.75)}


def parabolic_parameter(k: int, target: float = -1.0, max_iter: int = 100) -> float:
    """Real c where a k-cycle has multiplier ``target`` (default -1).

    Solves f^k(z) = z, (f^k)'(z) = target jointly in the real (z, c) plane.
    """
    key = (k, int(target))
    if key not in _PARABOLIC_SEEDS:
        raise BracketError(f"no real parabolic root bracketed for k={k}, multiplier={target}")
    z, c = _PARABOLIC_SEEDS[key]
    for _ in range(max_iter):
        w, d, d2, dc, dzc = orbit_jet(c, z, k)
        f1 = (w - z).real
        f2 = (d - target).real
        j11, j12 = (d - 1).real, dc.real
        j21, j22 = d2.real, dzc.real
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        dz = (f1 * j22 - f2 * j12) / det
        dcc = (j11 * f2 - j21 * f1) / det
        z -= dz
        c -= dcc
        if abs(dz) + abs(dcc) < 1e-16:
            break
    lo, hi = _PARABOLIC_BRACKETS[k]
    if not lo <= c <= hi:
        raise BracketError(f"root c={c} left the bracket [{lo}, {hi}]")
    cyc = cycle_from_point(c, k, z)
    if abs(cyc.multiplier - target) > 1e-12:
        raise BracketError(f"multiplier residual {abs(cyc.multiplier - target):.2e}")
    return float(c)


NEUTRAL_BAND = 1e-7


def classify_parameter(c, budget: int = 2000, max_period: int = 8) -> Classification:
    """Escaping / attracting / undetermined, from the critical orbit.

    Cycles with ``|multiplier| > 1 - NEUTRAL_BAND`` count as neutral, so
    parabolic parameters come out undetermined.
    """
    c = complex(c)
    z = 0j
    bound = max(2.0, abs(c))
    for n in range(1, budget + 1):
        z = z * z + c
        if abs(z) > bound:
            return Classification("escaping", n_escape=n)
    for p in range(1, max_period + 1):
        w = _newton_periodic(c, p, z, 100)
        if w is None:
            continue
        try:
            _check_cycle(c, p, w)
        except (ConvergenceError, MinimalityError):
            continue
        cyc = cycle_from_point(c, p, w)
        if abs(cyc.multiplier) < 1 - NEUTRAL_BAND:
            return Classification("attracting", period=p, multiplier=cyc.multiplier)
    return Classification("undetermined")


def select_cycle_point(cycle: Cycle) -> int:
    """Index of the cycle point with the largest |(f^k)''|."""
    best, idx = -1.0, 0
    for i, z in enumerate(cycle.points):
        s = abs(orbit_jet(cycle.c, z, cycle.period)[2])
        if s > best:
            best, idx = s, i
    return idx
