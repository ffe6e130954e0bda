"""Pure numpy versions of the compiled kernels, used when the extension is absent."""

import numpy as np

BACKEND = "python"

# numpy level-wise expansion cap per block (2**14 leaves)
_BLOCK_DEPTH = 14


def _lae(a, b):
    m = np.maximum(a, b)
    d = -np.abs(a - b)
    out = m + np.log1p(np.exp(d))
    both_inf = np.isneginf(a) & np.isneginf(b)
    return np.where(both_inf, -np.inf, out)


def _expand(c, depth, roots, rootlogs):
    zs = np.asarray(roots, dtype=np.complex128)
    ls = np.asarray(rootlogs, dtype=np.float64)
    zmin = np.inf
    for _ in range(depth):
        r = np.sqrt(zs - c)
        ar = np.abs(r)
        if ar.size:
            zmin = min(zmin, float(ar.min()))
        acc = ls + np.log(2.0 * ar)
        zs = np.stack([r, -r], axis=1).ravel()
        ls = np.repeat(acc, 2)
    return zs, ls, zmin


def _reduce_blocks(vals, block):
    # vals: (m*block,) -> (m,) by adjacent pairs
    v = vals.reshape(-1, block)
    while v.shape[1] > 1:
        v = _lae(v[:, 0::2], v[:, 1::2])
    return v[:, 0]


def subtree_lse(c, t, depth, roots, rootlogs):
    roots = np.asarray(roots, dtype=np.complex128)
    rootlogs = np.asarray(rootlogs, dtype=np.float64)
    if depth > _BLOCK_DEPTH:
        top = depth - _BLOCK_DEPTH
        out = np.empty(roots.size)
        zmin = np.inf
        for i in range(roots.size):
            mids, mlogs, zm = _expand(c, top, roots[i:i + 1], rootlogs[i:i + 1])
            sub, zm2 = subtree_lse(c, t, _BLOCK_DEPTH, mids, mlogs)
            zmin = min(zmin, zm, zm2)
            out[i] = _reduce_blocks(sub, sub.size)[0]
        return out, zmin
    zs, ls, zmin = _expand(c, depth, roots, rootlogs)
    return _reduce_blocks(-t * ls, 1 << depth), zmin


def tree_leaves(c, depth, roots, rootlogs):
    return _expand(c, depth, roots, rootlogs)


def pairwise_lse(x):
    b = np.array(x, dtype=np.float64, copy=True)
    if b.size == 0:
        return -np.inf
    while b.size > 1:
        h = b.size // 2
        head = _lae(b[0:2 * h:2], b[1:2 * h:2])
        b = np.concatenate([head, b[2 * h:]])
    return float(b[0])


def periodic_newton(c, n, seeds, maxit, tol, radius):
    z = np.array(seeds, dtype=np.complex128, copy=True)
    its = np.zeros(z.size, dtype=np.int64)
    done = np.zeros(z.size, dtype=bool)
    failed = np.zeros(z.size, dtype=bool)
    with np.errstate(all="ignore"):
        for it in range(maxit):
            act = ~(done | failed)
            if not act.any():
                break
            za = z[act]
            w = za.copy()
            d = np.ones_like(za)
            for _ in range(n):
                d = d * (2.0 * w)
                w = w * w + c
            bad = ~np.isfinite(w) | (np.abs(w) > radius) | (d == 1.0)
            step = np.where(bad, 0.0, (w - za) / (d - 1.0))
            znew = za - step
            idx = np.flatnonzero(act)
            z[idx] = np.where(bad, za, znew)
            its[idx] += np.where(bad, 0, 1)
            failed[idx[bad]] = True
            conv = ~bad & (np.abs(step) <= tol * (1.0 + np.abs(znew)))
            done[idx[conv]] = True
        w = z.copy()
        acc = np.zeros(z.size)
        for _ in range(n):
            acc = acc + np.log(2.0 * np.abs(w))
            w = w * w + c
    its[~done] = -1
    return z, acc, its


def _ret(cycle, sigma, w):
    u = w / sigma
    d = 1.0 + 0j
    for a in cycle:
        d = d * (2.0 * u + 2.0 * a)
        u = u * u + 2.0 * a * u
    return sigma * u, d


def backward_chain(cycle, sigma, lam, z_start, N, maxit, tol):
    cycle = [complex(a) for a in cycle]
    anchors = np.zeros(N + 1, dtype=np.complex128)
    fders = np.zeros(N + 1, dtype=np.complex128)
    anchors[0] = z_start
    fders[0] = _ret(cycle, sigma, z_start)[1]
    stop = N
    for n in range(N):
        z = complex(anchors[n])
        w = z / lam
        ok = False
        for _ in range(maxit):
            val, der = _ret(cycle, sigma, w)
            step = (val - z) / der
            w = w - step
            if abs(step) <= tol * abs(w):
                ok = True
                break
        if not ok or abs(w + z) > 0.5 * abs(z):
            stop = n
            break
        anchors[n + 1] = w
        fders[n + 1] = _ret(cycle, sigma, w)[1]
    return anchors, fders, stop
