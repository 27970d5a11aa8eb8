"""Pure numpy implementations of the row-wise estimator kernels.

Every function takes a C-contiguous 2-D float array and works on each row
independently, so results never depend on how rows are batched.
Mirrors the API of the compiled ``_kernels`` extension.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# cap on temporaries (elements) for pairwise kernels
_CHUNK_ELEMS = 1 << 22


def _rows(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D array")
    return x


def _chunks(nrows: int, width: int):
    step = max(1, _CHUNK_ELEMS // max(width, 1))
    for start in range(0, nrows, step):
        yield slice(start, min(nrows, start + step))


def median_rows(x):
    x = _rows(x)
    return np.median(x, axis=1)


def mean_rows(x):
    x = _rows(x)
    return x.sum(axis=1) / x.shape[1]


def sd_rows(x):
    x = _rows(x)
    n = x.shape[1]
    dev = x - mean_rows(x)[:, None]
    return np.sqrt((dev * dev).sum(axis=1) / (n - 1))


def mad_rows(x):
    x = _rows(x)
    med = np.median(x, axis=1)
    return np.median(np.abs(x - med[:, None]), axis=1)


def qn_rows(x, order_stat):
    x = _rows(x)
    m, n = x.shape
    i, j = np.triu_indices(n, k=1)
    out = np.empty(m)
    h = n // 2 + 1
    kth = h * (h - 1) // 2 - 1
    for sl in _chunks(m, i.size):
        d = np.abs(x[sl, i] - x[sl, j])
        if order_stat:
            out[sl] = np.partition(d, kth, axis=1)[:, kth]
        else:
            out[sl] = np.median(d, axis=1)
    return out


def hl_rows(x):
    x = _rows(x)
    m, n = x.shape
    if n == 1:
        return x[:, 0].copy()
    i, j = np.triu_indices(n, k=1)
    out = np.empty(m)
    for sl in _chunks(m, i.size):
        out[sl] = np.median((x[sl, i] + x[sl, j]) / 2.0, axis=1)
    return out


def hd_rows(x, weights):
    x = _rows(x)
    w = np.asarray(weights, dtype=np.float64)
    s = np.sort(x, axis=1)
    return (s * w).sum(axis=1)


def _mslog_g(r2, u, kappa):
    with np.errstate(over="ignore", invalid="ignore"):
        return _mslog_g_unchecked(r2, u, kappa)


def _mslog_g_unchecked(r2, u, kappa):
    t = np.exp(u)[:, None]
    z = 0.5 * r2 * t
    th = np.tanh(z)
    n = r2.shape[1]
    g = th.sum(axis=1) / n - kappa
    dg = ((1.0 - th * th) * z).sum(axis=1) / n
    return g, dg


def mslog_rows(x, kappa, rtol=1e-10, max_iter=200):
    """M-scale with rho(u) = tanh(u**2 / 2) about the row median.

    Solves mean(rho(r / sigma)) = kappa in u = log(1 / sigma**2) by Newton
    steps kept inside a bracket that is grown or bisected when a step
    escapes it (the left side is increasing in u). Returns ``(sigma, flag)``
    with flag 1 for degenerate rows (no positive root) and 2 for rows that
    hit ``max_iter``.
    """
    x = _rows(x)
    m, n = x.shape
    med = np.median(x, axis=1)
    # sorted so the sums do not depend on element order
    r2 = np.sort((x - med[:, None]) ** 2, axis=1)
    sigma = np.zeros(m)
    flag = np.zeros(m, dtype=np.int8)
    nonzero = (r2 > 0.0).sum(axis=1)
    ok = nonzero > kappa * n
    flag[~ok] = 1
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return sigma, flag
    r2 = r2[idx]
    u = -np.log(r2.sum(axis=1) / n)
    lo = np.full(idx.size, -np.inf)
    hi = np.full(idx.size, np.inf)
    tol_u = 2.0 * rtol
    active = np.arange(idx.size)
    for _ in range(max_iter):
        if active.size == 0:
            break
        ua = u[active]
        g, dg = _mslog_g(r2[active], ua, kappa)
        # nan means exp overflowed: treat as overshoot
        over = (g > 0.0) | np.isnan(g)
        lo_a = np.where(g < 0.0, ua, lo[active])
        hi_a = np.where(over, ua, hi[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            un = ua - g / dg
            mid = 0.5 * (lo_a + hi_a)
        un = np.where(np.isneginf(lo_a), np.maximum(un, ua - 2.0), un)
        un = np.where(np.isposinf(hi_a), np.minimum(un, ua + 2.0), un)
        bad = ~((un > lo_a) & (un < hi_a)) | ~np.isfinite(un)
        fallback = np.where(np.isneginf(lo_a), ua - 2.0, np.where(np.isposinf(hi_a), ua + 2.0, mid))
        un = np.where(bad, fallback, un)
        done = (np.abs(un - ua) <= tol_u) | (g == 0.0)
        un = np.where(g == 0.0, ua, un)
        u[active] = un
        lo[active] = lo_a
        hi[active] = hi_a
        active = active[~done]
    sigma[idx] = np.exp(-0.5 * u)
    if active.size:
        flag[idx[active]] = 2
    return sigma, flag


def huber_rows(x, c, tol, max_iter, aux_const):
    """Huber location by iteratively reweighted means.

    Auxiliary scale is ``aux_const * MAD`` of the row; rows with zero
    auxiliary scale return their median. Returns ``(T, flag)`` with flag 2
    for rows that hit ``max_iter``.
    """
    x = _rows(x)
    m = x.shape[0]
    t = np.median(x, axis=1)
    scale = aux_const * np.median(np.abs(x - t[:, None]), axis=1)
    flag = np.zeros(m, dtype=np.int8)
    active = np.flatnonzero(scale > 0.0)
    for _ in range(max_iter):
        if active.size == 0:
            break
        xa = x[active]
        ta = t[active]
        sa = scale[active]
        r = np.abs(xa - ta[:, None]) / sa[:, None]
        with np.errstate(divide="ignore"):
            w = np.where(r > c, c / r, 1.0)
        tn = (w * xa).sum(axis=1) / w.sum(axis=1)
        t[active] = tn
        active = active[np.abs(tn - ta) > tol * sa]
    flag[active] = 2
    return t, flag
