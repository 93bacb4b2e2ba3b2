"""Adaptive Simpson quadrature with a Richardson error estimate."""

from __future__ import annotations

from collections.abc import Callable

from .errors import DepthExceeded

MIN_DEPTH = 4


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-8,
    max_depth: int = 40,
    min_depth: int = MIN_DEPTH,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``.

    A panel is accepted when ``|S2 - S1| <= 15 * tol`` with ``tol`` halved at
    each split, and the accepted value is the extrapolated ``S2 + (S2 - S1)/15``
    (Boole's rule, all weights positive). Panels are always split at least
    ``min_depth`` times so that an accidental early agreement of S1 and S2 is
    not trusted.

    Returns:
        ``(value, error_estimate)`` where the estimate is the sum of the
        per-panel ``|S2 - S1| / 15``.

    Raises:
        DepthExceeded: if a panel needs more than ``max_depth`` splits.
    """
    if a == b:
        return 0.0, 0.0
    if b < a:
        value, err = adaptive_simpson(f, b, a, abs_tol, max_depth, min_depth)
        return -value, err

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    err_total = 0.0
    # explicit stack instead of recursion; order of summation is deterministic
    stack = [(a, b, fa, fm, fb, whole, abs_tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s_whole, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        fl = f(0.5 * (lo + mid))
        fr = f(0.5 * (mid + hi))
        s_left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid)
        s_right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi)
        s_split = s_left + s_right
        diff = s_split - s_whole
        if depth >= min_depth and abs(diff) <= 15.0 * tol:
            total += s_split + diff / 15.0
            err_total += abs(diff) / 15.0
            continue
        if depth >= max_depth:
            raise DepthExceeded(f"no convergence on [{lo!r}, {hi!r}] after {max_depth} subdivisions")
        stack.append((mid, hi, fmid, fr, fhi, s_right, 0.5 * tol, depth + 1))
        stack.append((lo, mid, flo, fl, fmid, s_left, 0.5 * tol, depth + 1))
    return total, err_total
