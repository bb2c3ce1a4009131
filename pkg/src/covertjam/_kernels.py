"""Hot loops, compiled with numba when available.

Set ``COVERTJAM_DISABLE_NUMBA=1`` to force the pure-numpy path.  Both
paths are always importable (``*_numpy`` / ``*_jit``) so they can be
compared against each other; the un-suffixed names dispatch to the
selected one.  With compilation disabled the ``*_jit`` names are the
same loops run by the interpreter.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("COVERTJAM_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0
LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# antenna selection

def _topk_mask_numpy(power, n_d):
    # stable argsort on -power puts the lowest index first among ties
    order = np.argsort(-power, axis=1, kind="stable")[:, :n_d]
    mask = np.zeros(power.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=1)
    return mask


def topk_gain_numpy(h_ab, n_d):
    power = np.abs(h_ab) ** 2
    return np.where(_topk_mask_numpy(power, n_d), power, 0.0).sum(axis=1)


def eve_gain_numpy(h_ab, h_ae, n_d):
    power = np.abs(h_ab) ** 2
    mask = _topk_mask_numpy(power, n_d)
    sel = np.where(mask, h_ab, 0.0)
    norm2 = (np.abs(sel) ** 2).sum(axis=1)
    proj = (np.conj(sel) * h_ae).sum(axis=1)
    return np.abs(proj) ** 2 / norm2


def _topk_row(power, n_d, chosen):
    # selection by repeated arg-max: strict '>' keeps the lowest index on ties
    m = power.shape[0]
    taken = np.zeros(m, dtype=np.bool_)
    for k in range(n_d):
        best = -1
        best_val = -1.0
        for i in range(m):
            if not taken[i] and power[i] > best_val:
                best = i
                best_val = power[i]
        taken[best] = True
        chosen[k] = best


def _topk_gain_loop(h_ab, n_d):
    n, m = h_ab.shape
    out = np.empty(n)
    power = np.empty(m)
    chosen = np.empty(n_d, dtype=np.int64)
    for r in range(n):
        for i in range(m):
            power[i] = h_ab[r, i].real ** 2 + h_ab[r, i].imag ** 2
        _topk_row(power, n_d, chosen)
        s = 0.0
        for k in range(n_d):
            s += power[chosen[k]]
        out[r] = s
    return out


def _eve_gain_loop(h_ab, h_ae, n_d):
    n, m = h_ab.shape
    out = np.empty(n)
    power = np.empty(m)
    chosen = np.empty(n_d, dtype=np.int64)
    for r in range(n):
        for i in range(m):
            power[i] = h_ab[r, i].real ** 2 + h_ab[r, i].imag ** 2
        _topk_row(power, n_d, chosen)
        norm2 = 0.0
        proj = 0.0 + 0.0j
        for k in range(n_d):
            i = chosen[k]
            norm2 += power[i]
            proj += h_ab[r, i].conjugate() * h_ae[r, i]
        out[r] = (proj.real ** 2 + proj.imag ** 2) / norm2
    return out


def count_errors_numpy(stat0, stat1, v):
    return int(np.count_nonzero(stat0 >= v)), int(np.count_nonzero(stat1 <= v))


def _count_errors_loop(stat0, stat1, v):
    n_fa = 0
    n_md = 0
    for i in range(stat0.shape[0]):
        if stat0[i] >= v:
            n_fa += 1
        if stat1[i] <= v:
            n_md += 1
    return n_fa, n_md


# ---------------------------------------------------------------------------
# DC ascent on one scalar power split
#
# With a = P*g_ab*Ljb, b = Ljb*Lab*sigma_b2, c = P*g_jb*Lab the jammed rate is
#   R(x) = log2(1 + a*x / (b + (1-x)*c)) = Sigma(x) - Psi(x)
#   Sigma(x) = log2(b + (1-x)*c + a*x),  Psi(x) = log2(b + (1-x)*c).
# Each step maximizes Sigma - (tangent of Psi at the anchor) over [0, hi].

def _rate(a, b, c, x):
    return math.log1p(a * x / (b + (1.0 - x) * c)) / LN2


def _surrogate(a, b, c, x, anchor, psi0, dpsi):
    return math.log(b + (1.0 - x) * c + a * x) / LN2 - psi0 - dpsi * (x - anchor)


def _golden_max(a, b, c, anchor, psi0, dpsi, lo, hi, tol):
    h = hi - lo
    if h <= tol:
        return hi
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    x1 = lo + INV_PHI2 * h
    x2 = lo + INV_PHI * h
    f1 = _surrogate(a, b, c, x1, anchor, psi0, dpsi)
    f2 = _surrogate(a, b, c, x2, anchor, psi0, dpsi)
    for _ in range(n - 1):
        if f1 > f2:
            hi = x2
            x2 = x1
            f2 = f1
            h *= INV_PHI
            x1 = lo + INV_PHI2 * h
            f1 = _surrogate(a, b, c, x1, anchor, psi0, dpsi)
        else:
            lo = x1
            x1 = x2
            f1 = f2
            h *= INV_PHI
            x2 = lo + INV_PHI * h
            f2 = _surrogate(a, b, c, x2, anchor, psi0, dpsi)
    return x1 if f1 > f2 else x2


def _dc_core(a, b, c, hi, x0, max_iters, rate_tol, x_tol, trace):
    """Run DC iterations; fills ``trace`` rows (iter, x, surrogate, rate).

    Returns (x, rate, iterations, converged, rows_written).
    """
    x = x0
    rate = _rate(a, b, c, x)
    trace[0, 0] = 0.0
    trace[0, 1] = x
    trace[0, 2] = rate
    trace[0, 3] = rate
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        base = b + (1.0 - x) * c
        psi0 = math.log(base) / LN2
        dpsi = -c / (base * LN2)
        cand = _golden_max(a, b, c, x, psi0, dpsi, 0.0, hi, x_tol)
        s_cand = _surrogate(a, b, c, cand, x, psi0, dpsi)
        s_hi = _surrogate(a, b, c, hi, x, psi0, dpsi)
        if s_hi >= s_cand:
            cand = hi
            s_cand = s_hi
        new_rate = _rate(a, b, c, cand)
        if s_cand < rate or new_rate < rate:
            # no surrogate progress within rounding: stay put
            cand = x
            s_cand = rate
            new_rate = rate
        gain = new_rate - rate
        x = cand
        rate = new_rate
        trace[it, 0] = it
        trace[it, 1] = x
        trace[it, 2] = s_cand
        trace[it, 3] = rate
        if gain < rate_tol:
            converged = True
            break
    return x, rate, it, converged, it + 1


def _dc_batch_loop(a, b, c, hi, x0, max_iters, rate_tol, x_tol):
    n = a.shape[0]
    xs = np.empty(n)
    rates = np.empty(n)
    iters = np.empty(n, dtype=np.int64)
    conv = np.empty(n, dtype=np.bool_)
    trace = np.empty((max_iters + 1, 4))
    for i in range(n):
        x, r, it, ok, _ = _dc_core(a[i], b[i], c[i], hi[i], x0[i], max_iters, rate_tol, x_tol, trace)
        xs[i] = x
        rates[i] = r
        iters[i] = it
        conv[i] = ok
    return xs, rates, iters, conv


def _np_rate(a, b, c, x):
    return np.log1p(a * x / (b + (1.0 - x) * c)) / LN2


def _np_surrogate(a, b, c, x, anchor, psi0, dpsi):
    return np.log(b + (1.0 - x) * c + a * x) / LN2 - psi0 - dpsi * (x - anchor)


def _np_golden_max(a, b, c, anchor, psi0, dpsi, lo, hi, tol):
    h = hi - lo
    small = h <= tol
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = np.where(small, 0, np.ceil(np.log(tol / h) / math.log(INV_PHI))).astype(np.int64)
    x1 = lo + INV_PHI2 * h
    x2 = lo + INV_PHI * h
    f1 = _np_surrogate(a, b, c, x1, anchor, psi0, dpsi)
    f2 = _np_surrogate(a, b, c, x2, anchor, psi0, dpsi)
    lo = lo.copy()
    for k in range(int(steps.max(initial=0)) - 1):
        act = k < steps - 1
        left = act & (f1 > f2)
        right = act & ~(f1 > f2)
        h = np.where(act, h * INV_PHI, h)
        # left move: bracket [lo, x2]
        x2 = np.where(left, x1, x2)
        f2 = np.where(left, f1, f2)
        # right move: bracket [x1, hi]
        lo = np.where(right, x1, lo)
        x1 = np.where(right, x2, x1)
        f1 = np.where(right, f2, f1)
        x1 = np.where(left, lo + INV_PHI2 * h, x1)
        x2 = np.where(right, lo + INV_PHI * h, x2)
        f1 = np.where(left, _np_surrogate(a, b, c, x1, anchor, psi0, dpsi), f1)
        f2 = np.where(right, _np_surrogate(a, b, c, x2, anchor, psi0, dpsi), f2)
    best = np.where(f1 > f2, x1, x2)
    return np.where(small, hi, best)


def dc_batch_numpy(a, b, c, hi, x0, max_iters, rate_tol, x_tol):
    a, b, c, hi, x0 = (np.asarray(v, dtype=float) for v in (a, b, c, hi, x0))
    x = x0.copy()
    rate = _np_rate(a, b, c, x)
    iters = np.zeros(a.shape, dtype=np.int64)
    conv = np.zeros(a.shape, dtype=bool)
    zero = np.zeros_like(a)
    for it in range(1, max_iters + 1):
        act = ~conv
        if not act.any():
            break
        base = b + (1.0 - x) * c
        psi0 = np.log(base) / LN2
        dpsi = -c / (base * LN2)
        cand = _np_golden_max(a, b, c, x, psi0, dpsi, zero, hi, x_tol)
        s_cand = _np_surrogate(a, b, c, cand, x, psi0, dpsi)
        s_hi = _np_surrogate(a, b, c, hi, x, psi0, dpsi)
        take_hi = s_hi >= s_cand
        cand = np.where(take_hi, hi, cand)
        s_cand = np.where(take_hi, s_hi, s_cand)
        new_rate = _np_rate(a, b, c, cand)
        stay = (s_cand < rate) | (new_rate < rate)
        cand = np.where(stay, x, cand)
        new_rate = np.where(stay, rate, new_rate)
        gain = new_rate - rate
        x = np.where(act, cand, x)
        rate = np.where(act, new_rate, rate)
        iters = np.where(act, it, iters)
        conv = conv | (act & (gain < rate_tol))
    return x, rate, iters, conv


dc_core_py = _dc_core

if USE_NUMBA:
    _topk_row = njit(cache=True)(_topk_row)
    topk_gain_jit = njit(cache=True)(_topk_gain_loop)
    eve_gain_jit = njit(cache=True)(_eve_gain_loop)
    count_errors_jit = njit(cache=True)(_count_errors_loop)
    _rate = njit(cache=True)(_rate)
    _surrogate = njit(cache=True)(_surrogate)
    _golden_max = njit(cache=True)(_golden_max)
    _dc_core = njit(cache=True)(_dc_core)
    dc_core_jit = _dc_core
    dc_batch_jit = njit(cache=True)(_dc_batch_loop)
else:
    topk_gain_jit = _topk_gain_loop
    eve_gain_jit = _eve_gain_loop
    count_errors_jit = _count_errors_loop
    dc_core_jit = _dc_core
    dc_batch_jit = _dc_batch_loop



def topk_gain_batch(h_ab, n_d):
    """Sum of the ``n_d`` largest ``|h|^2`` in each row of ``h_ab``."""
    h_ab = np.ascontiguousarray(h_ab, dtype=np.complex128)
    if USE_NUMBA:
        return topk_gain_jit(h_ab, int(n_d))
    return topk_gain_numpy(h_ab, int(n_d))


def eve_gain_batch(h_ab, h_ae, n_d):
    """``|w^H h_ae|^2`` per row with MRT over the best ``n_d`` antennas of ``h_ab``."""
    h_ab = np.ascontiguousarray(h_ab, dtype=np.complex128)
    h_ae = np.ascontiguousarray(h_ae, dtype=np.complex128)
    if USE_NUMBA:
        return eve_gain_jit(h_ab, h_ae, int(n_d))
    return eve_gain_numpy(h_ab, h_ae, int(n_d))


def count_errors(stat0, stat1, v):
    if USE_NUMBA:
        n_fa, n_md = count_errors_jit(np.ascontiguousarray(stat0), np.ascontiguousarray(stat1), v)
        return int(n_fa), int(n_md)
    return count_errors_numpy(stat0, stat1, v)


def dc_core(a, b, c, hi, x0, max_iters, rate_tol, x_tol):
    trace = np.empty((max_iters + 1, 4))
    fn = dc_core_jit if USE_NUMBA else dc_core_py
    x, rate, it, ok, rows = fn(float(a), float(b), float(c), float(hi), float(x0),
                               int(max_iters), float(rate_tol), float(x_tol), trace)
    return x, rate, int(it), bool(ok), trace[:rows]


def dc_batch(a, b, c, hi, x0, max_iters, rate_tol, x_tol):
    """Vectorized DC ascent; returns (x, rate, iterations, converged) arrays."""
    args = [np.ascontiguousarray(np.broadcast_to(np.asarray(v, dtype=float), np.shape(a)))
            for v in (a, b, c, hi, x0)]
    if USE_NUMBA:
        return dc_batch_jit(*args, int(max_iters), float(rate_tol), float(x_tol))
    return dc_batch_numpy(*args, int(max_iters), float(rate_tol), float(x_tol))
