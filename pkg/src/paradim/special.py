"""Profile functions of the two-petal asymptotics and the scaling machinery.

Gamma and v are closed forms with cancellation-safe branches. Lambda_eps^h is
evaluated in log space. Tail integrals G_+/G_- and the Upsilon functionals
use scipy's QUADPACK on substituted variables: the algebraic blow-up at
u = 0 is graded away by u = w**p, and the exponential tail is cut where the
integrand has fallen by e^-60 relative to its start.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, SolverError

TAYLOR_CUT = 1e-4
LOG_BAND = 1e-3


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error: float
    evaluations: int

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ConvergenceError("quadrature produced a non-finite value")
        if self.abs_error < 0:
            raise ValueError("error estimate must be non-negative")


@dataclass(frozen=True)
class ScalingFit:
    c0: float
    side: str
    samples: tuple
    exponent: float
    amplitude: float
    stderr: float
    r_squared: float = field(default=1.0)


# ---------------------------------------------------------------- closed forms

SERIES_CUT = 0.5


def _expm1_minus_y(y: float) -> float:
    """e^y - 1 - y without cancellation for small y."""
    if abs(y) >= SERIES_CUT:
        return math.expm1(y) - y
    term = y * y / 2
    total = term
    k = 2
    while abs(term) > 1e-18 * abs(total):
        k += 1
        term *= y / k
        total += term
    return total


def _xcosh_minus_sinh(x: float) -> float:
    # x cosh x - sinh x = sum_{k>=1} x^(2k+1) (1/(2k)! - 1/(2k+1)!)
    if abs(x) >= SERIES_CUT:
        return x * math.cosh(x) - math.sinh(x)
    x2 = x * x
    power = x * x2
    total = 0.0
    k = 1
    fact = 2.0  # (2k)!
    while True:
        term = power * (1 / fact - 1 / (fact * (2 * k + 1)))
        total += term
        if abs(term) <= 1e-18 * abs(total):
            return total
        k += 1
        fact *= (2 * k - 1) * (2 * k)
        power *= x2


def gamma_fn(x: float) -> float:
    x = float(x)
    if abs(x) < TAYLOR_CUT:
        # odd part about 1/4: x/6 - x^3/45
        return 0.25 + x / 6 - x ** 3 / 45
    if x > 1:
        # Gamma(x) + Gamma(-x) = 1/2; the small side carries full relative precision
        return 0.5 - gamma_fn(-x)
    e = math.expm1(2 * x)
    return math.exp(2 * x) * _expm1_minus_y(2 * x) / (2 * e * e)


def gamma_prime(x: float) -> float:
    x = float(x)
    if abs(x) < TAYLOR_CUT:
        return 1 / 6 - x * x / 15
    if abs(x) > 350:
        return 0.0
    s = math.sinh(x)
    return _xcosh_minus_sinh(x) / (2 * s ** 3)


def v_fn(x: float) -> float:
    """Antiderivative of 6*Gamma - 1 vanishing at 0."""
    x = float(x)
    if abs(x) < TAYLOR_CUT:
        return x / 2 + x * x / 2
    if x > 20:
        return 3 * x / -math.expm1(-2 * x) - x - 1.5
    e = math.expm1(2 * x)
    return 3 * x * math.exp(2 * x) / e - x - 1.5


def _log_abs_expm1_2u(u: float) -> float:
    if u > 20:
        return 2 * u + math.log1p(-math.exp(-2 * u))
    if u < -20:
        return math.log1p(-math.exp(2 * u))
    return math.log(abs(math.expm1(2 * u)))


def log_lambda(h: float, eps: float, u: float) -> float:
    if u == 0:
        raise DomainError("Lambda has a pole at u = 0")
    return h * (u - 1.5 * _log_abs_expm1_2u(u)) + eps * u


def lambda_fn(h: float, eps: float, u: float) -> float:
    return math.exp(log_lambda(h, eps, u))


# ---------------------------------------------------------------- quadrature

def _quad(fn, lo, hi, tol):
    val, err, info = integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=tol, limit=400,
                                    full_output=1)[:3]
    if not math.isfinite(val):
        raise ConvergenceError("quadrature diverged")
    return val, err, info["neval"]


def _graded(fn, top, power, tol):
    """int_0^top fn(u) du for fn ~ u**power at 0, via u = w**p with p*(power+1) = 1."""
    if power <= -1:
        raise DomainError("integrand is not integrable at 0")
    p = 1.0 / (power + 1.0)

    def g(w):
        if w == 0:
            return 0.0 if p > 1 else fn(0.0)
        u = w ** p
        return fn(u) * p * w ** (p - 1)

    return _quad(g, 0.0, top ** (1 / p), tol)


def _log_scaled(fn, lo, hi, tol):
    """int_lo^hi fn(u) du over t = log(u) for 0 < lo < hi."""
    def g(t):
        u = math.exp(t)
        return fn(u) * u

    return _quad(g, math.log(lo), math.log(hi), tol)


def _tail_integrand(h, sign):
    # minus side folded onto u > 0 through Lambda(-u) = e^{hu} Lambda(u)
    if sign == "plus":
        return lambda u: lambda_fn(h, 0.0, u)
    return lambda u: lambda_fn(h, h, u)


def _tail_rate(h, sign):
    return 2 * h if sign == "plus" else h


def g_tail(h: float, s: float, sign: str = "plus", tol: float = 1e-11) -> QuadratureResult:
    """G_+(s) = int_s^inf Lambda_0^h for s > 0; G_-(s) = int_-inf^s Lambda_0^h for s < 0."""
    if sign not in ("plus", "minus"):
        raise DomainError("sign must be 'plus' or 'minus'")
    if sign == "plus" and not s > 0:
        raise DomainError("G_+ needs s > 0")
    if sign == "minus" and not s < 0:
        raise DomainError("G_- needs s < 0")
    lo = abs(s)
    fn = _tail_integrand(h, sign)
    hi = lo + 60.0 / _tail_rate(h, sign)
    val, err, nev = _log_scaled(fn, lo, hi, tol)
    return QuadratureResult(val, err, nev)


def g_tail_reflected(h: float, s: float, tol: float = 1e-11) -> QuadratureResult:
    """G_-(-s) computed directly on the negative axis, without the reflection identity."""
    if not s > 0:
        raise DomainError("needs s > 0")
    fn = lambda x: lambda_fn(h, 0.0, -x)  # noqa: E731
    val, err, nev = _log_scaled(fn, s, s + 60.0 / h, tol)
    return QuadratureResult(val, err, nev)


def _upsilon_by_parts(h, sign, tol):
    if sign == "plus":
        fn = lambda x: v_fn(x) * lambda_fn(h, 0.0, x) if x > 0 else 0.0  # noqa: E731
        rate = 2 * h
    else:
        fn = lambda x: -v_fn(-x) * lambda_fn(h, h, x) if x > 0 else 0.0  # noqa: E731
        rate = h
    power = 1 - 1.5 * h
    v1, e1, n1 = _graded(fn, 1.0, power, tol)
    v2, e2, n2 = _quad(fn, 1.0, 1.0 + 60.0 / rate + 10.0, tol)
    return v1 + v2, e1 + e2, n1 + n2


def _upsilon_direct(h, sign, tol):
    # int (6 Gamma(s) - 1) G(s) ds with G itself by quadrature
    counter = [0]

    def inner(x):
        if x <= 0:
            return 0.0
        if sign == "plus":
            r = g_tail(h, x, "plus", tol)
            out = (6 * gamma_fn(x) - 1) * r.value
        else:
            r = g_tail(h, -x, "minus", tol)
            out = (6 * gamma_fn(-x) - 1) * r.value
        counter[0] += r.evaluations
        return out

    rate = 2 * h if sign == "plus" else h
    power = 1 - 1.5 * h
    v1, e1, n1 = _graded(inner, 1.0, power, tol * 10)
    v2, e2, n2 = _quad(inner, 1.0, 1.0 + 60.0 / rate + 10.0, tol * 10)
    return v1 + v2, e1 + e2, n1 + n2 + counter[0]


def upsilon(h: float, sign: str = "plus", tol: float = 1e-11) -> QuadratureResult:
    """Upsilon_+/- (h) for 1 <= h < 4/3, by-parts value with cross-form error folded in."""
    if sign not in ("plus", "minus"):
        raise DomainError("sign must be 'plus' or 'minus'")
    if not 1 <= h < 4 / 3:
        raise DomainError("Upsilon is defined only for h in [1, 4/3)")
    val, err, nev = _upsilon_by_parts(h, sign, tol)
    alt, err2, nev2 = _upsilon_direct(h, sign, tol)
    return QuadratureResult(val, err + err2 + abs(val - alt), nev + nev2)


def upsilon_forms(h: float, sign: str = "plus", tol: float = 1e-11):
    """(by-parts value, direct double-integral value), for cross-checking."""
    if not 1 <= h < 4 / 3:
        raise DomainError("Upsilon is defined only for h in [1, 4/3)")
    return _upsilon_by_parts(h, sign, tol)[0], _upsilon_direct(h, sign, tol)[0]


# ---------------------------------------------------------------- derivatives and fits

def fd_derivative(value_fn, c: float, h0: float, uncertainty: float = 0.0,
                  slope_hint: float | None = None) -> float:
    """Central difference with one Richardson halving.

    When ``uncertainty`` (noise level of value_fn) is given, the step is
    raised so the difference is at least 10x that noise.
    """
    h = float(h0)
    if uncertainty > 0 and slope_hint:
        h = max(h, 10 * uncertainty / abs(slope_hint))
    vals = [value_fn(c + h), value_fn(c - h), value_fn(c + h / 2), value_fn(c - h / 2)]
    if not all(math.isfinite(v) for v in vals):
        raise SolverError("non-finite sample in finite difference")
    d1 = (vals[0] - vals[1]) / (2 * h)
    d2 = (vals[2] - vals[3]) / h
    return (4 * d2 - d1) / 3


def scaling_fit(samples, c0: float) -> ScalingFit:
    """Log-log regression of |d'| against |c - c0| on one side of c0."""
    pts = [(float(c), float(d)) for c, d in samples]
    if len(pts) < 4:
        raise SolverError("scaling fit needs at least 4 samples")
    sides = {c < c0 for c, _ in pts}
    if len(sides) != 1 or any(c == c0 for c, _ in pts):
        raise DomainError("samples must lie strictly on one side of c0")
    signs = {d > 0 for _, d in pts}
    if len(signs) != 1 or any(d == 0 for _, d in pts):
        raise SolverError("derivative changes sign among samples")
    pts.sort(key=lambda p: -abs(p[0] - c0))
    x = np.array([math.log(abs(c - c0)) for c, _ in pts])
    y = np.array([math.log(abs(d)) for _, d in pts])
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    icpt = ym - slope * xm
    res = y - (icpt + slope * x)
    ss_res = float((res ** 2).sum())
    ss_tot = float(((y - ym) ** 2).sum())
    dof = len(pts) - 2
    stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.inf
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(c0=c0, side="left" if pts[0][0] < c0 else "right",
                      samples=tuple(pts), exponent=slope, amplitude=math.exp(icpt),
                      stderr=stderr, r_squared=r2)


def classify_regime(d_c0: float, band: float = LOG_BAND, petals: int = 2):
    """Regime of d'(c) as c -> c0, from the dimension at c0.

    Returns (tag, predicted exponent or None).
    """
    if not 1 < d_c0 < 2:
        raise DomainError("dimension at c0 must lie in (1, 2)")
    if petals == 1:
        return "power-law", d_c0 - 1.5
    if abs(d_c0 - 4 / 3) <= band:
        return "logarithmic", None
    if d_c0 < 4 / 3:
        return "power-law", 1.5 * d_c0 - 2
    return "finite", None


# ---------------------------------------------------------------- tables

def gamma_table(lo: float, hi: float, points: int):
    xs = np.linspace(lo, hi, points)
    return [(float(x), gamma_fn(x), v_fn(x)) for x in xs]


def lambda_table(h: float, eps: float, lo: float, hi: float, points: int):
    xs = np.linspace(lo, hi, points)
    return [(float(u), lambda_fn(h, eps, u)) for u in xs if u != 0]


def upsilon_table(hs):
    rows = []
    for h in hs:
        p = upsilon(h, "plus")
        m = upsilon(h, "minus")
        rows.append((float(h), p.value, m.value, p.abs_error, m.abs_error))
    return rows


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
