"""Acceptance suite: one PASS/FAIL line per criterion, printed at the end of the run.

    pytest tests/test_acceptance.py -v -s
"""

import math
import time

import mpmath
import numpy as np
import pytest

from paradim import cylinders as cy
from paradim.normal_form import Conjugated, h_map, model_normal_form, translation_defect
from paradim.pressure import (
    bowen_dimension,
    derivative_via_formula,
    periodic_set,
    preimage_leaf_logs,
    preimage_pressure,
)
from paradim.scan import derivative_scan
from paradim.special import fd_derivative, g_tail, gamma_fn, lambda_fn, upsilon, v_fn

LN2 = math.log(2)


def _clear():
    periodic_set.cache_clear()
    preimage_leaf_logs.cache_clear()


# Each check returns (ok, detail, numbers); numbers feed the determinism check.

def check_1(workers=None):
    t0 = time.perf_counter()
    vals = [preimage_pressure(0, t, 10, workers=workers).value for t in (0, 0.5, 1, 1.5)]
    dt = time.perf_counter() - t0
    err = max(abs(v - (1 - t) * LN2) for v, t in zip(vals, (0, 0.5, 1, 1.5)))
    return err <= 1e-10 and dt < 1, f"max |P - (1-t)ln2| = {err:.1e}, {dt:.2f}s", vals


def check_2(workers=None):
    t0 = time.perf_counter()
    d0 = bowen_dimension(0, workers=workers).dimension
    a = bowen_dimension(-1, method="preimage", workers=workers).dimension
    b = bowen_dimension(-1, method="periodic", workers=workers).dimension
    dt = time.perf_counter() - t0
    ok = abs(d0 - 1) <= 1e-6 and 1.2 < a < 1.35 and 1.2 < b < 1.35 and abs(a - b) <= 3e-3 and dt < 30
    return ok, f"d(0)={d0:.9f}, d(-1)={a:.5f}/{b:.5f} (gap {abs(a - b):.1e}), {dt:.1f}s", [d0, a, b]


def check_3(workers=None):
    t0 = time.perf_counter()
    g0 = gamma_fn(0)
    h = 1e-5
    gp = (gamma_fn(h) - gamma_fn(-h)) / (2 * h)
    xs = np.linspace(-20, 20, 10_000)
    g = np.array([gamma_fn(x) for x in xs])
    # 1/2 - Gamma(x) = Gamma(-x) resolves the right half below the spacing of doubles near 1/2
    right = xs[xs >= 0]
    comp = np.array([gamma_fn(-x) for x in right])
    strict = bool(np.all(np.diff(g[xs <= 0]) > 0) and np.all(np.diff(comp) < 0))
    refl = max(abs(gamma_fn(x) + gamma_fn(-x) - 0.5) for x in right)
    ties = int(np.sum(np.diff(g) == 0))
    in_range = bool(np.all(g > 0) and np.all(g < 0.5))
    lim = max(abs(gamma_fn(30) - 0.5), abs(gamma_fn(-30)))
    dt = time.perf_counter() - t0
    ok = (abs(g0 - 0.25) <= 1e-12 and abs(gp - 1 / 6) <= 1e-8 and strict and in_range
          and np.all(np.diff(g) >= 0) and refl <= 1e-15 and lim <= 1e-12 and dt < 1)
    detail = (f"Gamma(0) err {abs(g0 - 0.25):.0e}, Gamma'(0) err {abs(gp - 1 / 6):.0e}, "
              f"strict via 1/2-Gamma (reflection {refl:.0e}), {ties} float ties in Gamma, limits {lim:.0e}, {dt:.2f}s")
    return ok, detail, [g0, gp, float(g.sum())]


def check_4(workers=None):
    t0 = time.perf_counter()
    r = upsilon(1.0, "minus")
    dt = time.perf_counter() - t0
    return abs(r.value) <= 1e-6 and dt < 5, f"Upsilon_-(1) = {r.value:.1e}, {dt:.2f}s", [r.value]


def check_5(workers=None):
    t0 = time.perf_counter()
    ok, parts, nums = True, [], []
    for h in (1.05, 1.15, 1.25, 1.30):
        p, m = upsilon(h, "plus"), upsilon(h, "minus")
        err = p.abs_error + m.abs_error
        ok &= p.value - m.value > 10 * err and m.value > 10 * m.abs_error
        parts.append(f"{h}: {p.value:.4f}>{m.value:.4f}")
        nums += [p.value, m.value]
    dt = time.perf_counter() - t0
    return ok and dt < 20, ", ".join(parts) + f", {dt:.1f}s", nums


def check_6(workers=None):
    t0 = time.perf_counter()
    worst = 0.0
    for h in (1.0, 1.1, 1.25):
        for u in (0.1, 1.0, 5.0):
            a = lambda_fn(h, 0, -u)
            b = math.exp(h * u) * lambda_fn(h, 0, u)
            worst = max(worst, abs(a - b) / b)
    s = np.logspace(-4, -2, 9)
    slope = np.polyfit(np.log(s), np.log([g_tail(1.2, x).value for x in s]), 1)[0]
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and abs(slope - (1 - 1.8)) <= 0.02 and dt < 5
    return ok, f"reflection {worst:.0e}, tail slope {slope:.4f} vs -0.8, {dt:.2f}s", [worst, slope]


def _mp_gamma(x):
    if abs(x) < mpmath.mpf("1e-15"):
        return mpmath.mpf(1) / 4 + x / 6
    return (1 + (mpmath.sinh(2 * x) - 2 * x) / (mpmath.cosh(2 * x) - 1)) / 4


def check_7(workers=None):
    t0 = time.perf_counter()
    mpmath.mp.dps = 30
    errs = []
    for x in (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0):
        q = mpmath.quad(lambda s: 6 * _mp_gamma(s) - 1, [0, x])
        errs.append(abs(v_fn(x) - float(q)))
    low = min(v_fn(x) + math.exp(2 * x) * v_fn(-x) for x in np.linspace(1e-3, 10, 2000))
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-8 and low >= -1e-12 and dt < 2
    return ok, f"v vs quadrature {max(errs):.0e}, min reflection sum {low:.1e}, {dt:.2f}s", errs + [low]


def check_8(workers=None):
    t0 = time.perf_counter()
    nf = model_normal_form(0.0)
    ch = cy.backward_chain(nf, N=5001)
    n = np.arange(50, 5001)
    slope = np.polyfit(np.log(n), np.log(ch.sizes[n - 1]), 1)[0]
    lo, hi = math.inf, -math.inf
    for d in (0.0, 1e-3, -1e-3, 2e-3, -2e-3):
        nf = model_normal_form(d)
        ch = cy.backward_chain(nf, N=2001)
        r = [cy.size_height_ratio(nf, ch, k) for k in range(200, 2001)]
        lo, hi = min(lo, min(r)), max(hi, max(r))
    dt = time.perf_counter() - t0
    ok = abs(slope + 1.5) <= 0.05 and lo >= 0.8 and hi <= 1.25 and dt < 10
    return ok, f"size slope {slope:.4f}, cube-law ratio in [{lo:.3f}, {hi:.3f}], {dt:.2f}s", [slope, lo, hi]


def check_9(workers=None):
    t0 = time.perf_counter()
    res, dev = 0.0, 0.0
    for d in (0.002, -0.002):
        nf = model_normal_form(d)
        ch = cy.backward_chain(nf, N=900)
        for n in range(100, 801):
            res = max(res, cy.beta_gamma_residual(nf, ch, n))
            dev = max(dev, abs(cy.dsquare_re_ratio(nf, ch, n) - (6 * gamma_fn(n * d) - 1)))
    dt = time.perf_counter() - t0
    ok = res <= 0.03 and dev <= 0.1 and dt < 10
    return ok, f"max beta residual {res:.1e}, max Re-ratio deviation {dev:.3f}, {dt:.2f}s", [res, dev]


def check_10(workers=None):
    t0 = time.perf_counter()
    worst, count = 0.0, 0
    for d in (0.0, 1e-3, -1e-3):
        nf = model_normal_form(d)
        conj = Conjugated(nf)
        ch = cy.backward_chain(nf, N=3000)
        for z in ch.anchors[cy.REBASE_INDEX:]:
            w = h_map(nf, z, conj.m)
            if abs(w) <= 0.05:
                worst = max(worst, translation_defect(nf, w, conj=conj))
                count += 1
    dt = time.perf_counter() - t0
    return worst <= 0.1 and dt < 5, f"max defect {worst:.4f} over {count} anchors, {dt:.2f}s", [worst]


def check_11(workers=None):
    t0 = time.perf_counter()
    rels, nums = [], []
    for c in (-0.5, -0.6):
        d = bowen_dimension(c, workers=workers).dimension
        f = derivative_via_formula(c, dimension=d, workers=workers)
        fd = fd_derivative(lambda x: bowen_dimension(x, workers=workers).dimension, c, 1e-3)
        rels.append(abs(f / fd - 1))
        nums += [f, fd]
    dt = time.perf_counter() - t0
    ok = max(rels) <= 0.05 and dt < 300
    return ok, f"relative gaps {rels[0]:.1e} (-0.5), {rels[1]:.1e} (-0.6), {dt:.1f}s", nums


@pytest.mark.parametrize("number", range(1, 12))
def test_numeric_criteria(number, verdict):
    ok, detail, _ = globals()[f"check_{number}"]()
    verdict(number, ok, detail)


@pytest.mark.slow
def test_two_petal_scaling(verdict):
    t0 = time.perf_counter()
    parts, ok = [], True
    amps = {}
    for side in ("left", "right"):
        r = derivative_scan(-0.75, side)
        neg = all(row.dprime < 0 for row in r.rows)
        gap = abs(r.fit.exponent - r.predicted_exponent) if r.fit else math.inf
        ok &= neg and gap <= 0.1
        amps[side] = r.fit.amplitude if r.fit else math.nan
        expo = r.fit.exponent if r.fit else math.nan
        parts.append(f"{side}: d_hat={r.d_limit:.4f} exponent {expo:+.3f} "
                     f"vs {r.predicted_exponent:+.3f}, d'<0 {neg}")
    dt = time.perf_counter() - t0
    soft = "K+ >= K-" if amps["right"] >= amps["left"] else "K+ < K-"
    verdict(12, ok and dt < 1800, "; ".join(parts) + f"; soft: {soft}; {dt:.0f}s")


@pytest.mark.slow
def test_one_petal_contrast(verdict):
    t0 = time.perf_counter()
    r = derivative_scan(0.25, "left")
    pos = all(row.dprime > 0 for row in r.rows)
    gap = abs(r.fit.exponent - r.predicted_exponent) if r.fit else math.inf
    expo = r.fit.exponent if r.fit else math.nan
    dt = time.perf_counter() - t0
    ok = pos and gap <= 0.1 and r.d_limit < 1.5 and dt < 1800
    verdict(13, ok, f"d_hat={r.d_limit:.4f}, exponent {expo:+.3f} vs {r.predicted_exponent:+.3f}, "
                    f"d'>0 {pos}, {dt:.0f}s")


def test_measure_regimes(verdict):
    t0 = time.perf_counter()
    targets = {1.2: 10 ** (2 - 1.8), 4 / 3: 4 / 3, 1.5: 1.0}
    ok, parts = True, []
    for h, want in targets.items():
        for sign in (1, -1):
            r = cy.mass_ratio(h, sign * 1e-3, sign * 1e-4)
            ok &= abs(r / want - 1) <= 0.1
            parts.append(f"h={h:.3f}{'+' if sign > 0 else '-'}: {r:.3f}/{want:.3f}")
    dt = time.perf_counter() - t0
    verdict(14, ok and dt < 10, ", ".join(parts) + f", {dt:.1f}s")


def test_worker_independence(verdict):
    runs = {}
    for w in (1, 4, 8):
        _clear()
        runs[w] = [[float(x).hex() for x in globals()[f"check_{k}"](w)[2]] for k in range(1, 12)]
    same = [k + 1 for k in range(11) if runs[1][k] == runs[4][k] == runs[8][k]]
    verdict(15, len(same) == 11, f"bit-identical across 1/4/8 workers for criteria {same}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
