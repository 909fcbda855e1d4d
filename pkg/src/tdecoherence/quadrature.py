"""Adaptive Simpson quadrature with compensated accumulation."""

import math

__all__ = ["adaptive_simpson"]


def adaptive_simpson(f, a, b, rtol=1e-12, atol=1e-24, max_depth=50):
    """Integrate a scalar function ``f`` over ``[a, b]``.

    Intervals are bisected until the Richardson estimate of the local error
    drops below the interval's share of ``max(rtol * |I|, atol)``, where
    ``I`` is the running estimate of the whole integral.  Accepted panel
    values (with their Richardson correction) are summed with ``math.fsum``.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = abs(whole)
    width = b - a

    pieces = []
    stack = [(a, b, fa, fm, fb, whole, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        refined = left + right
        err = refined - est
        scale = max(scale, abs(refined))
        share = (hi - lo) / width
        tol = max(rtol * scale, atol) * share
        if abs(err) <= 15.0 * tol or depth >= max_depth:
            pieces.append(refined)
            pieces.append(err / 15.0)
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, depth + 1))
    return sign * math.fsum(pieces)
