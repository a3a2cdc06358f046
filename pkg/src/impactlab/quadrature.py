"""Adaptive Simpson quadrature."""

import math

__all__ = ["adaptive_simpson"]


def adaptive_simpson(func, a, b, rtol=1e-10, atol=0.0, max_intervals=10**6):
    """Integrate ``func`` over ``[a, b]`` with adaptive Simpson's rule.

    Intervals are refined until the Richardson error estimate of each piece
    falls below its share of ``max(atol, rtol * |running integral|)``.

    Parameters
    ----------
    func : callable
        Scalar function of one float.
    a, b : float
        Integration bounds; ``b < a`` flips the sign.
    rtol, atol : float
        Relative and absolute tolerances.
    max_intervals : int
        Maximum number of subintervals before giving up.

    Returns
    -------
    float

    Raises
    ------
    QuadratureError
        If the tolerance cannot be met within ``max_intervals``.
    """
    from .exceptions import QuadratureError

    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(func, b, a, rtol, atol, max_intervals)

    fa, fb = func(a), func(b)
    m = 0.5 * (a + b)
    fm = func(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # (a, b, fa, fm, fb, estimate, depth)
    stack = [(a, b, fa, fm, fb, whole, 0)]
    pieces = []
    n_intervals = 1
    scale = abs(whole)
    while stack:
        lo, hi, flo, fmid, fhi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = func(lm), func(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        refined = left + right
        scale = max(scale, abs(refined))
        tol = max(atol, rtol * scale) * (hi - lo) / (b - a)
        if abs(refined - est) <= 15.0 * tol or depth >= 60 or mid in (lo, hi):
            pieces.append(refined + (refined - est) / 15.0)
            continue
        n_intervals += 1
        if n_intervals > max_intervals:
            raise QuadratureError(
                f"adaptive Simpson exceeded {max_intervals} subintervals on [{a}, {b}]"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, depth + 1))
    return math.fsum(pieces)
