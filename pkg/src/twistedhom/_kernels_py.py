"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in the compiled
``_ckernels`` extension.  Both must stay deterministic: results may depend on
the inputs only, never on ``threads``.
"""

from concurrent.futures import ThreadPoolExecutor
import math

import numpy as np

NAME = "python"

SERIES_MAX = 2.0
_RESCALE = 1e250
_CHUNK = 4096


def miller_start(n, x):
    """Even starting index for the downward recurrence of ``J_n(x)``."""
    top = max(float(n), x)
    start = int(top) + 30 + int(math.sqrt(80.0 * top))
    return start + (start & 1)


def _chunks(size, threads):
    if threads <= 1 or size <= _CHUNK:
        return [slice(0, size)]
    step = max(_CHUNK, -(-size // threads))
    return [slice(i, min(i + step, size)) for i in range(0, size, step)]


def _series(n, x):
    half = 0.5 * x
    q = -half * half
    term = np.exp(n * np.log(half) - math.lgamma(n + 1.0))
    total = term.copy()
    for k in range(1, 40):
        term = term * q / (k * (k + n))
        total += term
    return total


def _miller(n, x, top):
    two_over_x = 2.0 / x
    bjp = np.zeros_like(x)
    bj = np.ones_like(x)
    ans = np.zeros_like(x)
    total = np.zeros_like(x)
    for k in range(top, 0, -1):
        bjm = k * two_over_x * bj - bjp
        bjp = bj
        bj = bjm
        big = np.abs(bj) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            bj *= scale
            bjp *= scale
            ans *= scale
            total *= scale
        if k - 1 == n:
            ans = bj.copy()
        if k - 1 > 0 and (k - 1) % 2 == 0:
            total += 2.0 * bj
    total += bj
    return ans / total


def _bessel_block(n, x):
    out = np.empty_like(x)
    zero = x == 0.0
    small = (x <= SERIES_MAX) & ~zero
    large = x > SERIES_MAX
    out[zero] = 1.0 if n == 0 else 0.0
    if small.any():
        out[small] = _series(n, x[small])
    if large.any():
        # each element gets its own start index so results never depend on
        # which other values share the call (or the chunk)
        xl = x[large]
        top = np.maximum(float(n), xl)
        starts = np.floor(top).astype(np.int64) + 30 + np.floor(np.sqrt(80.0 * top)).astype(np.int64)
        starts += starts & 1
        vals = np.empty_like(xl)
        for top in np.unique(starts):
            sel = starts == top
            vals[sel] = _miller(n, xl[sel], int(top))
        out[large] = vals
    return out


def bessel_jn(n, x, threads=1):
    """``J_n(x)`` for integer ``n >= 0`` and a 1-D array of ``x >= 0``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    parts = _chunks(x.size, threads)
    if len(parts) == 1:
        return _bessel_block(n, x)
    out = np.empty_like(x)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for sl, res in zip(parts, pool.map(lambda s: _bessel_block(n, x[s]), parts)):
            out[sl] = res
    return out


def bilinear(raster, x_left, y_top, pitch, xs, ys, threads=1):
    """Cell-centred bilinear sampling of ``raster`` (row 0 at the top).

    Samples outside the raster extent are zero; inside, indices are clamped
    so the outermost half-cells take the edge value.
    """
    raster = np.ascontiguousarray(raster, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    ny, nx = raster.shape
    inside = (
        (xs >= x_left)
        & (xs <= x_left + nx * pitch)
        & (ys <= y_top)
        & (ys >= y_top - ny * pitch)
    )
    u = np.clip((xs - x_left) / pitch - 0.5, 0.0, nx - 1.0)
    v = np.clip((y_top - ys) / pitch - 0.5, 0.0, ny - 1.0)
    j0 = np.minimum(np.floor(u).astype(np.intp), max(nx - 2, 0))
    i0 = np.minimum(np.floor(v).astype(np.intp), max(ny - 2, 0))
    j1 = np.minimum(j0 + 1, nx - 1)
    i1 = np.minimum(i0 + 1, ny - 1)
    fu = u - j0
    fv = v - i0
    top = (1.0 - fu) * raster[i0, j0] + fu * raster[i0, j1]
    bottom = (1.0 - fu) * raster[i1, j0] + fu * raster[i1, j1]
    val = (1.0 - fv) * top + fv * bottom
    return np.where(inside, val, 0.0)


def pixel_sum(sub, threads=1):
    """Sum the trailing (subsample) axis of a ``(ny, nx, s*s)`` array."""
    sub = np.ascontiguousarray(sub, dtype=np.float64)
    out = np.zeros(sub.shape[:2])
    for k in range(sub.shape[2]):
        out += sub[:, :, k]
    return out


def _pair_block(rows, w, a, abar, b, bbar):
    # accumulate over j in order, like the compiled kernel, so both backends round identically
    wr, ar, abr, br, bbr = w[rows], a[rows], abar[rows], b[rows], bbar[rows]
    s_cd = np.zeros(rows.size)
    s_cc = np.zeros(rows.size)
    s_dd = np.zeros(rows.size)
    for j in range(w.size):
        wij = wr * w[j]
        cd = ar * b[j] - abar[j] * bbr
        cc = abr * b[j] + abar[j] * br
        dd = ar * bbar[j] + a[j] * bbr
        s_cd += wij * (cd.real * cd.real + cd.imag * cd.imag)
        s_cc += wij * (cc.real * cc.real + cc.imag * cc.imag)
        s_dd += wij * (dd.real * dd.real + dd.imag * dd.imag)
    return s_cd, s_cc, s_dd


def pair_sums(w, a, abar, b, bbar, threads=1):
    """Brute-force double sums over node pairs ``(i, j)``.

    Returns ``(s_cd, s_cc, s_dd)`` with

    - ``s_cd = sum w_i w_j |a_i b_j - abar_j bbar_i|^2``
    - ``s_cc = sum w_i w_j |abar_i b_j + abar_j b_i|^2``
    - ``s_dd = sum w_i w_j |a_i bbar_j + a_j bbar_i|^2``
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    arrays = [np.ascontiguousarray(v, dtype=np.complex128) for v in (a, abar, b, bbar)]
    n = w.size
    step = max(1, -(-n // max(threads, 1)))
    blocks = [np.arange(i, min(i + step, n)) for i in range(0, n, step)]

    def run(rows):
        return _pair_block(rows, w, *arrays)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(rows) for rows in blocks]
    rows_cd = np.concatenate([p[0] for p in parts])
    rows_cc = np.concatenate([p[1] for p in parts])
    rows_dd = np.concatenate([p[2] for p in parts])
    return float(np.sum(rows_cd)), float(np.sum(rows_cc)), float(np.sum(rows_dd))
