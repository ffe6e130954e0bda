"""Local normal form of the return map at a (near-)parabolic cycle.

Near a cycle point alpha of period k the return map is shifted to the origin
and rescaled so that

    F(w) = lam*w + a*w**2 + b*w**3 + ...

with the quadratic coefficient frozen at its value at the parabolic
parameter. On top of it: the small period-two orbit, the Mobius
conjugator that straightens it, and the Fatou coordinate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .dynamics import (
    Cycle,
    continue_cycle,
    cycle_from_point,
    find_cycle,
    select_cycle_point,
)
from .errors import ConvergenceError, DomainError, SolverError

FATOU_SERIES_DELTA = 1e-8
POLE_TOL = 1e-12
# below this |delta| the conjugator is its limit z -> iz
DELTA_ZERO = 1e-13


@dataclass(frozen=True)
class NormalForm:
    c0: float
    k: int
    c: float
    alpha: complex
    lam: complex
    delta: complex
    a: complex
    b: complex
    A: float
    cycle: tuple  # cycle points at c, starting at alpha
    sigma: complex  # w -> sigma*w rescaling, a(c)/a(c0)


@dataclass(frozen=True)
class SectorSpec:
    theta: float
    r: float
    kind: str

    def __post_init__(self):
        if not 0 < self.theta < math.pi / 2:
            raise DomainError("sector half-angle must lie in (0, pi/2)")
        if self.r <= 0:
            raise DomainError("sector radius must be positive")
        if self.kind not in _SECTOR_CENTERS and self.kind not in _HAT_KINDS:
            raise DomainError(f"unknown sector kind {self.kind!r}")


def _jet_mul(p, q):
    # degree-3 truncated product
    return [
        p[0] * q[0],
        p[0] * q[1] + p[1] * q[0],
        p[0] * q[2] + p[1] * q[1] + p[2] * q[0],
        p[0] * q[3] + p[1] * q[2] + p[2] * q[1] + p[3] * q[0],
    ]


def sqrt_neg(delta) -> complex:
    """Principal sqrt(-delta), with sqrt(-delta) = i*sqrt(delta) for real delta > 0."""
    delta = complex(delta)
    if delta.imag == 0:
        x = delta.real
        return 1j * math.sqrt(x) if x > 0 else complex(math.sqrt(-x))
    return cmath.sqrt(-delta)


def taylor_at_cycle(c, k: int, alpha):
    """(lam, a, b): Taylor coefficients of f^k(alpha + u) - alpha in u."""
    c = complex(c)
    alpha = complex(alpha)
    p = [alpha, 1 + 0j, 0j, 0j]
    for _ in range(k):
        sq = _jet_mul(p, p)
        p = [sq[0] + c, sq[1], sq[2], sq[3]]
    res = abs(p[0] - alpha)
    if res > 1e-10 * max(1.0, abs(alpha)):
        raise DomainError(f"alpha is not on a {k}-cycle (residual {res:.2e})")
    return p[1], p[2], p[3]


def _parabolic_seed(c0, k):
    if k == 1:
        return (1 - cmath.sqrt(1 - 4 * c0)) / 2
    if k == 2:
        return (-1 + cmath.sqrt(-3 - 4 * complex(c0))) / 2
    raise DomainError("only periods 1 and 2 have built-in seeds; pass seed=")


def normal_form(c, c0, k: int, seed=None, steps: int = 8) -> NormalForm:
    """Normal form of f_c^k near the cycle that is parabolic at ``c0``."""
    c, c0 = float(c), float(c0)
    seed = _parabolic_seed(c0, k) if seed is None else complex(seed)
    base = find_cycle(c0, k, seed)
    i = select_cycle_point(base)
    alpha0 = base.points[i]
    _, a0, b0 = taylor_at_cycle(c0, k, alpha0)
    if abs(a0) < 1e-10:
        raise SolverError("quadratic coefficient vanishes at the chosen cycle point")
    if c == c0:
        cyc = base
    else:
        rolled = cycle_from_point(c0, k, alpha0)
        cyc = continue_cycle(rolled, c0, c, steps)
        i = 0
    pts = cyc.points[i:] + cyc.points[:i]
    alpha = pts[0]
    lam, ac, bc = taylor_at_cycle(c, k, alpha)
    sigma = ac / a0
    A2 = a0 * a0 + b0
    if abs(A2.imag) > 1e-9 or A2.real <= 0:
        raise SolverError(f"a^2 + b = {A2} is not positive at the parabolic parameter")
    return NormalForm(
        c0=c0, k=k, c=c, alpha=alpha, lam=lam, delta=lam + 1,
        a=ac / sigma, b=bc / (sigma * sigma), A=math.sqrt(A2.real),
        cycle=tuple(pts), sigma=sigma,
    )


def model_normal_form(delta: float) -> NormalForm:
    """F(w) = lam*w + w**2 with lam = delta - 1 (the period-one family at c0 = -3/4)."""
    lam = complex(delta - 1)
    alpha = lam / 2
    c = (alpha - alpha * alpha).real
    return NormalForm(c0=-0.75, k=1, c=c, alpha=alpha, lam=lam, delta=complex(delta),
                      a=1 + 0j, b=0j, A=1.0, cycle=(alpha,), sigma=1 + 0j)


def return_map(nf: NormalForm, w):
    """F(w), F'(w), F''(w) for the normalized return map."""
    u = complex(w) / nf.sigma
    d, d2 = 1 + 0j, 0j
    for al in nf.cycle:
        d2 = d2 * (2 * u + 2 * al) + 2 * d * d
        d = d * (2 * u + 2 * al)
        u = u * u + 2 * al * u
    return nf.sigma * u, d, d2 / nf.sigma


def iterate_return(nf: NormalForm, w, n: int):
    for _ in range(n):
        w = return_map(nf, w)[0]
    return w


def small_cycle(nf: NormalForm, max_iter: int = 60):
    """The period-two orbit (p_plus, p_minus) of F near 0."""
    delta = nf.delta
    if not 0 < abs(delta) < 0.1:
        raise DomainError("small cycle needs 0 < |delta| < 0.1")
    root = sqrt_neg(delta) / nf.A
    scale = abs(root)
    p, q = root, -root
    last = math.inf
    for it in range(max_iter):
        fp, dp, _ = return_map(nf, p)
        fq, dq, _ = return_map(nf, q)
        r1, r2 = fp - q, fq - p
        # Newton on F(p) = q, F(q) = p; det ~ 4 delta, so roundoff floors the step
        det = dp * dq - 1
        if det == 0:
            raise ConvergenceError("singular Jacobian in small cycle Newton")
        sp = (dq * r1 + r2) / det
        sq = (r1 + dp * r2) / det
        p, q = p - sp, q - sq
        step = max(abs(sp), abs(sq))
        if step <= 1e-15 * scale:
            break
        if it > 3 and step < 1e-6 * scale and step > 0.5 * last:
            break
        last = step
    else:
        raise ConvergenceError("small cycle Newton did not converge")
    for z in (p, q):
        ratio = abs(z) / scale
        if not 0.2 < ratio < 5:
            raise SolverError("period-two point is not of order sqrt(delta)")
    if abs(p - q) < 1e-3 * scale:
        raise SolverError("small cycle Newton collapsed onto the fixed point")
    return p, q


def _mobius(nf: NormalForm):
    if abs(nf.delta) < DELTA_ZERO:
        return None
    p, q = small_cycle(nf)
    coef = 1j * sqrt_neg(nf.delta) / nf.A * (p - q)
    return coef, p + q, 2 * p * q


def h_map(nf: NormalForm, z, _m=None):
    """Mobius map sending 0 to 0 and the period-two points to +-i*sqrt(-delta)/A."""
    z = complex(z)
    m = _mobius(nf) if _m is None else _m
    if m is None:
        return 1j * z
    coef, s, pr = m
    den = s * z - pr
    if abs(den) < POLE_TOL * max(1.0, abs(pr)):
        raise DomainError("point at the pole of the conjugator")
    return coef * z / den


def h_inverse(nf: NormalForm, w, _m=None):
    w = complex(w)
    m = _mobius(nf) if _m is None else _m
    if m is None:
        return -1j * w
    coef, s, pr = m
    den = w * s - coef
    if abs(den) < POLE_TOL * max(1.0, abs(coef)):
        raise DomainError("point at the pole of the inverse conjugator")
    return w * pr / den


class Conjugated:
    """The return map in the straightened coordinate, with the Mobius data cached."""

    def __init__(self, nf: NormalForm):
        self.nf = nf
        self.m = _mobius(nf)

    def h(self, z):
        return h_map(self.nf, z, self.m)

    def h_inv(self, w):
        return h_inverse(self.nf, w, self.m)

    def step(self, w):
        return self.h(return_map(self.nf, self.h_inv(w))[0])

    def iterate(self, w, n):
        for _ in range(n):
            w = self.step(w)
        return w


def fatou_Z(nf: NormalForm, z):
    """Fatou coordinate log(1 - delta/(A^2 z^2)) / (2 delta); -1/(2 A^2 z^2) at delta = 0."""
    z = complex(z)
    if z == 0:
        raise DomainError("Fatou coordinate is singular at 0")
    delta = nf.delta
    q = 1 / (nf.A * nf.A * z * z)
    if abs(delta) < FATOU_SERIES_DELTA:
        w = delta * q
        # log(1 - w) / (2 delta) = -(q/2)(1 + w/2 + w^2/3 + ...)
        return -0.5 * q * (1 + w / 2 + w * w / 3 + w ** 3 / 4)
    arg = 1 - delta * q
    if arg.imag == 0 and arg.real <= 0:
        raise DomainError("Fatou coordinate crosses the branch cut of log")
    return cmath.log(arg) / (2 * delta)


def fatou_Z_inv(nf: NormalForm, Z):
    """Inverse of :func:`fatou_Z` on the principal branch of the square root."""
    Z = complex(Z)
    delta = nf.delta
    if abs(delta) < FATOU_SERIES_DELTA:
        x = 2 * delta * Z
        # delta/(1 - e^x) = -1/(2Z) * 1/(1 + x/2 + x^2/6 + ...)
        val = -1 / (2 * Z) / (1 + x / 2 + x * x / 6 + x ** 3 / 24)
    else:
        x = 2 * delta * Z
        den = -x * (1 + x / 2 + x * x / 6) if abs(x) < 1e-5 else 1 - cmath.exp(x)
        if den == 0:
            raise DomainError("inverse Fatou coordinate is singular here")
        val = delta / den
    return cmath.sqrt(val) / nf.A


def translation_defect(nf: NormalForm, zhat, n: int = 1, conj: Conjugated | None = None,
                       escape: float = 0.5) -> float:
    """|Z(Fhat^(2n)(zhat)) - Z(zhat) - 2n| / n, forward iterates of the straightened map."""
    if n < 1:
        raise DomainError("n must be >= 1")
    conj = Conjugated(nf) if conj is None else conj
    w = complex(zhat)
    z0 = fatou_Z(nf, w)
    wide = (SectorSpec(3 * math.pi / 8, escape, "plus"),
            SectorSpec(3 * math.pi / 8, escape, "minus"))
    for _ in range(2 * n):
        w = conj.step(w)
        if not any(in_sector(w, s) for s in wide):
            raise SolverError("orbit left the sector")
    return abs(fatou_Z(nf, w) - z0 - 2 * n) / n


_SECTOR_CENTERS = {"plus": 0.0, "minus": math.pi, "up": math.pi / 2, "down": -math.pi / 2}
_HAT_KINDS = {"hat-up", "hat-down", "hat-plus", "hat-minus"}


def normalized_arg(z: complex) -> float:
    """arg z in (-3pi/4, 5pi/4]."""
    t = cmath.phase(z)
    if t <= -0.75 * math.pi:
        t += 2 * math.pi
    return t


def in_sector(z, spec: SectorSpec, nf: NormalForm | None = None) -> bool:
    z = complex(z)
    if spec.kind in _HAT_KINDS:
        if nf is None or not nf.delta.real > 0:
            raise DomainError("hat sectors need a normal form with delta > 0")
        if abs(z) >= spec.r:
            return False
        if spec.kind in ("hat-up", "hat-down"):
            p, q = small_cycle(nf)
            # p_plus sits in the upper half plane for delta > 0
            top, bottom = (p, q) if p.imag > 0 else (q, p)
            base, kind = (top, "up") if spec.kind == "hat-up" else (bottom, "down")
        else:
            s = math.sqrt(nf.delta.real)
            base, kind = (s, "plus") if spec.kind == "hat-plus" else (-s, "minus")
        return in_sector(z - base, SectorSpec(spec.theta, spec.r, kind))
    if z == 0:
        return True
    if abs(z) >= spec.r:
        return False
    return abs(normalized_arg(z) - _SECTOR_CENTERS[spec.kind]) <= spec.theta


def form_for_delta(c0, k: int, delta: float, seed=None, tol: float = 1e-14) -> NormalForm:
    """Normal form at the real parameter c near c0 whose cycle has lam + 1 = delta."""
    delta = float(delta)
    base = normal_form(c0, c0, k, seed)
    if delta == 0:
        return base
    h = 1e-6
    probe = normal_form(c0 + h, c0, k, seed)
    slope = (probe.delta.real - base.delta.real) / h
    c_prev, d_prev = c0, base.delta.real
    c = c0 + (delta - d_prev) / slope
    for _ in range(60):
        nf = normal_form(c, c0, k, seed)
        d = nf.delta.real
        if abs(d - delta) <= tol * max(1.0, abs(delta)):
            return nf
        if d == d_prev:
            break
        c_next = c - (d - delta) * (c - c_prev) / (d - d_prev)
        c_prev, d_prev, c = c, d, c_next
    raise ConvergenceError(f"no parameter with delta = {delta} near {c0}")
