"""Adaptive-precision orientation and in-circle tests.

A floating-point filter answers almost every query. When the filter cannot
certify the sign, the determinant is re-evaluated exactly with floating-point
expansion arithmetic (Shewchuk-style two-sum / two-product expansions), so the
returned sign is always correct for double-precision inputs.
"""

import numpy as np
from numba import njit

_EPS = 2.0**-53
_SPLITTER = 2.0**27 + 1.0
CCW_ERRBOUND_A = (3.0 + 16.0 * _EPS) * _EPS
ICC_ERRBOUND_A = (10.0 + 96.0 * _EPS) * _EPS

_jit = njit(cache=True, error_model="numpy")


@_jit
def _two_sum(a, b):
    x = a + b
    bv = x - a
    av = x - bv
    return x, (a - av) + (b - bv)


@_jit
def _fast_two_sum(a, b):
    # requires |a| >= |b|
    x = a + b
    return x, b - (x - a)


@_jit
def _two_diff(a, b):
    x = a - b
    bv = a - x
    av = x + bv
    return x, (a - av) + (bv - b)


@_jit
def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


@_jit
def _two_product(a, b):
    x = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = x - ahi * bhi
    err -= alo * bhi
    err -= ahi * blo
    return x, alo * blo - err


@_jit
def _diff_expansion(a, b):
    """Exact a - b as a zero-eliminated expansion."""
    x, y = _two_diff(a, b)
    if y != 0.0:
        out = np.empty(2)
        out[0] = y
        out[1] = x
        return out
    out = np.empty(1)
    out[0] = x
    return out


@_jit
def expansion_sum(e, f):
    """Sum of two nonoverlapping expansions (fast_expansion_sum_zeroelim)."""
    elen = e.shape[0]
    flen = f.shape[0]
    h = np.empty(elen + flen)
    ei = 0
    fi = 0
    enow = e[0]
    fnow = f[0]
    if (fnow > enow) == (fnow > -enow):
        q = enow
        ei += 1
    else:
        q = fnow
        fi += 1
    hi = 0
    if ei < elen and fi < flen:
        enow = e[ei]
        fnow = f[fi]
        if (fnow > enow) == (fnow > -enow):
            q, hh = _fast_two_sum(enow, q)
            ei += 1
        else:
            q, hh = _fast_two_sum(fnow, q)
            fi += 1
        if hh != 0.0:
            h[hi] = hh
            hi += 1
        while ei < elen and fi < flen:
            enow = e[ei]
            fnow = f[fi]
            if (fnow > enow) == (fnow > -enow):
                q, hh = _two_sum(q, enow)
                ei += 1
            else:
                q, hh = _two_sum(q, fnow)
                fi += 1
            if hh != 0.0:
                h[hi] = hh
                hi += 1
    while ei < elen:
        q, hh = _two_sum(q, e[ei])
        ei += 1
        if hh != 0.0:
            h[hi] = hh
            hi += 1
    while fi < flen:
        q, hh = _two_sum(q, f[fi])
        fi += 1
        if hh != 0.0:
            h[hi] = hh
            hi += 1
    if q != 0.0 or hi == 0:
        h[hi] = q
        hi += 1
    return h[:hi].copy()


@_jit
def scale_expansion(e, b):
    """Expansion e multiplied by the double b (scale_expansion_zeroelim)."""
    elen = e.shape[0]
    h = np.empty(2 * elen)
    hi = 0
    q, hh = _two_product(e[0], b)
    if hh != 0.0:
        h[hi] = hh
        hi += 1
    for k in range(1, elen):
        p1, p0 = _two_product(e[k], b)
        s, hh = _two_sum(q, p0)
        if hh != 0.0:
            h[hi] = hh
            hi += 1
        q, hh = _fast_two_sum(p1, s)
        if hh != 0.0:
            h[hi] = hh
            hi += 1
    if q != 0.0 or hi == 0:
        h[hi] = q
        hi += 1
    return h[:hi].copy()


@_jit
def expansion_product(e, f):
    acc = scale_expansion(e, f[0])
    for k in range(1, f.shape[0]):
        acc = expansion_sum(acc, scale_expansion(e, f[k]))
    return acc


@_jit
def _negate(e):
    return -e


@_jit
def expansion_sign(e):
    v = e[e.shape[0] - 1]
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


@_jit
def orient2d_exact(ax, ay, bx, by, cx, cy):
    acx = _diff_expansion(ax, cx)
    acy = _diff_expansion(ay, cy)
    bcx = _diff_expansion(bx, cx)
    bcy = _diff_expansion(by, cy)
    left = expansion_product(acx, bcy)
    right = expansion_product(acy, bcx)
    return expansion_sign(expansion_sum(left, _negate(right)))


@_jit
def _orient2d_if_exact(ax, ay, bx, by, cx, cy):
    """Naive determinant plus a flag saying whether every operation was exact."""
    acx, t0 = _two_diff(ax, cx)
    bcy, t1 = _two_diff(by, cy)
    acy, t2 = _two_diff(ay, cy)
    bcx, t3 = _two_diff(bx, cx)
    left, t4 = _two_product(acx, bcy)
    right, t5 = _two_product(acy, bcx)
    det, t6 = _two_diff(left, right)
    exact = t0 == 0.0 and t1 == 0.0 and t2 == 0.0 and t3 == 0.0 and t4 == 0.0 and t5 == 0.0 and t6 == 0.0
    return det, exact


@_jit
def orient2d(ax, ay, bx, by, cx, cy):
    """Positive when a, b, c turn counter-clockwise, negative when clockwise, 0 if collinear.

    The magnitude is only meaningful when the floating-point filter succeeds;
    callers should rely on the sign.
    """
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    errbound = CCW_ERRBOUND_A * (abs(detleft) + abs(detright))
    if det > errbound or -det > errbound:
        return det
    det, exact = _orient2d_if_exact(ax, ay, bx, by, cx, cy)
    if exact:
        return det
    return orient2d_exact(ax, ay, bx, by, cx, cy)


@_jit
def incircle_exact(ax, ay, bx, by, cx, cy, dx, dy):
    adx = _diff_expansion(ax, dx)
    ady = _diff_expansion(ay, dy)
    bdx = _diff_expansion(bx, dx)
    bdy = _diff_expansion(by, dy)
    cdx = _diff_expansion(cx, dx)
    cdy = _diff_expansion(cy, dy)
    alift = expansion_sum(expansion_product(adx, adx), expansion_product(ady, ady))
    blift = expansion_sum(expansion_product(bdx, bdx), expansion_product(bdy, bdy))
    clift = expansion_sum(expansion_product(cdx, cdx), expansion_product(cdy, cdy))
    bc = expansion_sum(expansion_product(bdx, cdy), _negate(expansion_product(cdx, bdy)))
    ca = expansion_sum(expansion_product(cdx, ady), _negate(expansion_product(adx, cdy)))
    ab = expansion_sum(expansion_product(adx, bdy), _negate(expansion_product(bdx, ady)))
    det = expansion_sum(expansion_product(alift, bc), expansion_product(blift, ca))
    det = expansion_sum(det, expansion_product(clift, ab))
    return expansion_sign(det)


@_jit
def _lift_if_exact(x, y):
    xx, t0 = _two_product(x, x)
    yy, t1 = _two_product(y, y)
    s, t2 = _two_sum(xx, yy)
    return s, t0 == 0.0 and t1 == 0.0 and t2 == 0.0


@_jit
def _cross_if_exact(ax, ay, bx, by):
    p, t0 = _two_product(ax, by)
    q, t1 = _two_product(bx, ay)
    s, t2 = _two_diff(p, q)
    return s, t0 == 0.0 and t1 == 0.0 and t2 == 0.0


@_jit
def _incircle_if_exact(ax, ay, bx, by, cx, cy, dx, dy):
    """Naive determinant plus a flag saying whether every operation was exact.

    Coordinates on a regular grid (e.g. multiples of 0.5 m) make cocircular
    quadruples common; this stage certifies their zero determinant cheaply.
    """
    adx, t0 = _two_diff(ax, dx)
    ady, t1 = _two_diff(ay, dy)
    bdx, t2 = _two_diff(bx, dx)
    bdy, t3 = _two_diff(by, dy)
    cdx, t4 = _two_diff(cx, dx)
    cdy, t5 = _two_diff(cy, dy)
    if t0 != 0.0 or t1 != 0.0 or t2 != 0.0 or t3 != 0.0 or t4 != 0.0 or t5 != 0.0:
        return 0.0, False
    alift, e0 = _lift_if_exact(adx, ady)
    blift, e1 = _lift_if_exact(bdx, bdy)
    clift, e2 = _lift_if_exact(cdx, cdy)
    bc, e3 = _cross_if_exact(bdx, bdy, cdx, cdy)
    ca, e4 = _cross_if_exact(cdx, cdy, adx, ady)
    ab, e5 = _cross_if_exact(adx, ady, bdx, bdy)
    if not (e0 and e1 and e2 and e3 and e4 and e5):
        return 0.0, False
    u, t0 = _two_product(alift, bc)
    v, t1 = _two_product(blift, ca)
    w, t2 = _two_product(clift, ab)
    uv, t3 = _two_sum(u, v)
    det, t4 = _two_sum(uv, w)
    return det, t0 == 0.0 and t1 == 0.0 and t2 == 0.0 and t3 == 0.0 and t4 == 0.0


@_jit
def incircle(ax, ay, bx, by, cx, cy, dx, dy):
    """Positive when d lies strictly inside the circle through counter-clockwise a, b, c."""
    adx = ax - dx
    bdx = bx - dx
    cdx = cx - dx
    ady = ay - dy
    bdy = by - dy
    cdy = cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady
    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    errbound = ICC_ERRBOUND_A * permanent
    if det > errbound or -det > errbound:
        return det
    det, exact = _incircle_if_exact(ax, ay, bx, by, cx, cy, dx, dy)
    if exact:
        return det
    return incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)
