"""Cylinder chains near the parabolic point and the perturbation functionals on them.

A chain is a backward orbit z_0, z_1, ... of the normal-form return map along
the inverse branch with derivative close to -1 at the fixed point. Indices are
based so that z_n sits at Fatou time -n; the size of the n-th cylinder is half
the distance between its two neighbours.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from ._backend import kernels
from .dynamics import continue_cycle, cycle_from_point
from .errors import DomainError, SolverError
from .normal_form import (
    NormalForm,
    fatou_Z_inv,
    h_inverse,
    return_map,
    taylor_at_cycle,
)
from .special import gamma_fn

REBASE_INDEX = 20
NEWTON_ITERS = 60
NEWTON_TOL = 1e-14
LOG_TINY = math.log(1e-300)


@dataclass(frozen=True, eq=False)
class CylinderChain:
    nf: NormalForm
    anchors: np.ndarray  # z_0..z_N
    fders: np.ndarray  # F'(z_n)
    complete: bool  # False when a branch jump cut the chain short

    @property
    def N(self) -> int:
        return len(self.anchors) - 1

    @cached_property
    def sizes(self) -> np.ndarray:
        # sizes[i] is |C_{i+1}|
        z = self.anchors
        return 0.5 * np.abs(z[2:] - z[:-2])

    @cached_property
    def psi(self) -> np.ndarray:
        """psi_dot at every anchor, from psi(z_n) F'(z_n) = -z_n + psi(z_{n-1})."""
        z, d = self.anchors, self.fders
        out = np.zeros(len(z), dtype=complex)
        acc = 0.0
        prev = 0j
        for n in range(1, len(z)):
            acc += math.log(abs(d[n]))
            if acc < LOG_TINY:
                raise SolverError(f"derivative of F^{n} underflows at anchor {n}")
            prev = (-z[n] + prev) / d[n]
            out[n] = prev
        return out


@dataclass(frozen=True)
class PerturbationSample:
    n: int
    z: complex
    psi_dot: complex
    beta: float
    dsq: complex
    re_ratio: float


@dataclass(frozen=True)
class MassReport:
    h: float
    delta: float
    N: int
    mass: float
    regime: str
    terms: int


def start_anchor(nf: NormalForm, index: int, side: int = 1) -> complex:
    """The point at Fatou time -index on the repelling axis; Im sign follows side*(-1)^index."""
    what = fatou_Z_inv(nf, -float(index))
    want = side * (1 if index % 2 == 0 else -1)
    for cand in (what, -what):
        z = h_inverse(nf, cand)
        if (z.imag > 0) == (want > 0):
            return z
    raise SolverError("no start anchor on the requested side")


def backward_chain(nf: NormalForm, z_start=None, N: int = 2000, side: int = 1,
                   rebase: int = REBASE_INDEX) -> CylinderChain:
    """Backward orbit of the return map toward 0 along the repelling access.

    Without ``z_start`` the point at Fatou time -rebase is placed on the
    repelling axis and its forward images fill indices 0..rebase-1, so index n
    matches Fatou time. A branch jump ends the chain early (complete=False).
    """
    if not 1 <= N <= 100_000:
        raise DomainError("N must lie in [1, 1e5]")
    if side not in (1, -1):
        raise DomainError("side must be +1 or -1")
    if z_start is None:
        base = min(rebase, N)
        z = start_anchor(nf, base, side)
        head = [z]
        for _ in range(base):
            head.append(return_map(nf, head[-1])[0])
        head.reverse()
        first = len(head) - 1
    else:
        z = complex(z_start)
        if z.imag == 0 or abs(z) > 0.2:
            raise DomainError("z_start must have Im z != 0 and |z| <= 0.2")
        head = [z]
        first = 0
    cyc = np.ascontiguousarray(nf.cycle, dtype=np.complex128)
    if abs(nf.sigma.imag) > 1e-12:
        raise DomainError("complex rescaling is not supported by the chain kernel")
    rest, ders, stop = kernels.backward_chain(cyc, float(nf.sigma.real), complex(nf.lam),
                                              complex(z), N - first, NEWTON_ITERS, NEWTON_TOL)
    anchors = np.concatenate([np.array(head[:-1], dtype=complex), rest[:stop + 1]])
    head_d = np.array([return_map(nf, w)[1] for w in head[:-1]], dtype=complex)
    fders = np.concatenate([head_d, ders[:stop + 1]])
    return CylinderChain(nf=nf, anchors=anchors, fders=fders, complete=stop == N - first)


def cylinder_size(chain: CylinderChain, n: int) -> float:
    if not 1 <= n <= chain.N - 1:
        raise IndexError(f"cylinder index {n} outside [1, {chain.N - 1}]")
    return float(chain.sizes[n - 1])


def _check_index(chain, n):
    if not 1 <= n <= chain.N:
        raise IndexError(f"anchor index {n} outside [1, {chain.N}]")


def psi_dot(nf: NormalForm, chain: CylinderChain, n: int) -> complex:
    _check_index(chain, n)
    return complex(chain.psi[n])


def beta(chain: CylinderChain, n: int) -> float:
    _check_index(chain, n)
    return float(chain.anchors[n].imag * chain.psi[n].imag)


def beta_gamma_residual(nf: NormalForm, chain: CylinderChain, n: int) -> float:
    if not 0 < abs(nf.delta) < 0.05:
        raise DomainError("needs 0 < |delta| < 0.05")
    return abs(nf.A ** 2 * beta(chain, n) - gamma_fn(n * nf.delta.real))


# ---------------------------------------------------------------- d/dlambda of F'

def _shifted_form(nf: NormalForm, c_new: float) -> NormalForm:
    start = cycle_from_point(nf.c, nf.k, nf.alpha)
    cyc = continue_cycle(start, nf.c, c_new, 1)
    pts = cyc.points
    i = min(range(len(pts)), key=lambda j: abs(pts[j] - nf.alpha))
    pts = pts[i:] + pts[:i]
    lam, ac, bc = taylor_at_cycle(c_new, nf.k, pts[0])
    sigma = ac / nf.a
    return NormalForm(c0=nf.c0, k=nf.k, c=c_new, alpha=pts[0], lam=lam, delta=lam + 1,
                      a=nf.a, b=bc / (sigma * sigma), A=nf.A, cycle=tuple(pts), sigma=sigma)


@lru_cache(maxsize=32)
def _neighbours(nf: NormalForm, step: float):
    return _shifted_form(nf, nf.c + step), _shifted_form(nf, nf.c - step)


def dlam_fprime(nf: NormalForm, z, step: float = 1e-6) -> complex:
    """d/dlambda of F'_lambda at fixed z: 1 for the period-one family, central difference otherwise."""
    if nf.k == 1:
        return 1 + 0j
    up, dn = _neighbours(nf, step)
    return (return_map(up, z)[1] - return_map(dn, z)[1]) / (up.lam - dn.lam)


def sample(nf: NormalForm, chain: CylinderChain, n: int) -> PerturbationSample:
    _check_index(chain, n)
    z = complex(chain.anchors[n])
    p = complex(chain.psi[n])
    _, d1, d2 = return_map(nf, z)
    dsq = dlam_fprime(nf, z) + p * d2
    return PerturbationSample(n=n, z=z, psi_dot=p, beta=z.imag * p.imag, dsq=dsq,
                              re_ratio=(dsq / d1).real)


def dsquare_re_ratio(nf: NormalForm, chain: CylinderChain, n: int) -> float:
    return sample(nf, chain, n).re_ratio


def re_ratio_predictions(nf: NormalForm, chain: CylinderChain, n: int):
    """(6 A^2 beta - 1, 6 Gamma(n delta) - 1) at anchor n."""
    b = beta(chain, n)
    return 6 * nf.A ** 2 * b - 1, 6 * gamma_fn(n * nf.delta.real) - 1


def size_height_ratio(nf: NormalForm, chain: CylinderChain, n: int) -> float:
    """|C_n| / (A^2 |Im z_n|^3 e^{-2 n delta})."""
    z = chain.anchors[n]
    d = nf.delta.real
    return cylinder_size(chain, n) / (nf.A ** 2 * abs(z.imag) ** 3 * math.exp(-2 * n * d))


def height_profile(nf: NormalForm, n: int) -> float:
    """delta e^{2n delta} / (e^{2n delta} - 1), the predicted A^2 Im^2 z_n (1/(2n) at delta = 0)."""
    d = nf.delta.real
    if d == 0 or abs(n * d) < 1e-12:
        return 1 / (2 * n)
    return d / -math.expm1(-2 * n * d)


# ---------------------------------------------------------------- measure model

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
MASS_CHUNK = 1 << 18


def _log_lambda_vec(h, eps, u):
    au = np.abs(u)
    with np.errstate(over="ignore", divide="ignore"):
        big = au > 20
        lg = np.where(big, 2 * au + np.log1p(-np.exp(-2 * np.minimum(au, 700))),
                      np.log(np.abs(np.expm1(2 * np.where(big, 0.0, au)))))
    # |e^{2u} - 1| = e^{2u}|1 - e^{-2u}| for u < 0 mirrors through the reflection
    lg = np.where(u < 0, lg - 2 * au, lg)
    return h * (u - 1.5 * lg) + eps * u


def _interval_masses(h, delta, j):
    # I_j = int over [j delta, (j+1) delta] (ordered) of Lambda_0^h
    lo = j * delta
    hi = (j + 1) * delta
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    u = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.exp(_log_lambda_vec(h, 0.0, u))
    return np.abs(half) * (vals @ _GL_W)


def measure_model_mass(h: float, delta: float, N: int = 1, alpha_cut: float = 40.0) -> MassReport:
    """Sum over n > N of |delta|^{3h/2-1} G(n delta), with the tail of |n delta| beyond alpha_cut/h dropped.

    G is G_+ for delta > 0 and G_- for delta < 0. The double sum is reorganized
    as sum_j (j - N) I_j with I_j the mass of [j delta, (j+1) delta].
    """
    if not 1 < h < 2:
        raise DomainError("h must lie in (1, 2)")
    if delta == 0:
        raise DomainError("delta must be non-zero")
    if N < 1:
        raise DomainError("N must be >= 1")
    top = max(int(math.ceil(alpha_cut / (h * abs(delta)))), N + 2)
    parts = []
    for lo in range(N + 1, top, MASS_CHUNK):
        j = np.arange(lo, min(lo + MASS_CHUNK, top), dtype=float)
        masses = _interval_masses(h, delta, j)
        if not np.all(np.isfinite(masses)):
            raise SolverError("non-finite cylinder mass in the measure model")
        parts.append(math.fsum(((j - N) * masses).tolist()))
    scale = abs(delta) ** (1.5 * h - 1)
    return MassReport(h=h, delta=delta, N=N, mass=scale * math.fsum(parts),
                      regime=mass_regime(h), terms=top - N - 1)


def mass_regime(h: float, band: float = 1e-3) -> str:
    if abs(h - 4 / 3) <= band:
        return "logarithmic"
    return "power-law" if h < 4 / 3 else "bounded"


def mass_ratio(h: float, delta_big: float, delta_small: float, N: int = 1) -> float:
    return measure_model_mass(h, delta_small, N).mass / measure_model_mass(h, delta_big, N).mass


# ---------------------------------------------------------------- export

CHAIN_HEADER = ("n", "re_z", "im_z", "size", "beta", "re_ratio")


def chain_rows(nf: NormalForm, chain: CylinderChain, ns=None):
    ns = range(1, chain.N) if ns is None else ns
    rows = []
    for n in ns:
        s = sample(nf, chain, n)
        rows.append((n, s.z.real, s.z.imag, cylinder_size(chain, n), s.beta, s.re_ratio))
    return rows


def write_chain_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CHAIN_HEADER)
        for r in rows:
            w.writerow([r[0]] + [repr(float(x)) for x in r[1:]])
