"""Adaptive Simpson quadrature.

Used for the Marchenko-Pastur distribution function and moments, where the
integrand has already been made smooth by a change of variables.
"""

import math

__all__ = ["adaptive_simpson"]


def _simpson(fa, fm, fb, h):
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=50, min_depth=4):
    """Integrate a scalar function over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Scalar integrand.
    a, b : float
        Integration limits; ``a > b`` flips the sign.
    tol : float
        Absolute error target for the whole interval.
    max_depth : int
        Bisection depth cap per branch.
    min_depth : int
        Bisections forced before the error test is trusted; symmetric
        integrands can otherwise fool the first comparison.

    Returns
    -------
    float
        The integral, with Richardson correction applied on accepted panels.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_depth, min_depth)

    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    total = 0.0
    # explicit stack; recursion depth would otherwise hit the interpreter limit
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - est
        if depth >= max_depth or (depth >= min_depth and abs(delta) <= 15.0 * eps):
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    if not math.isfinite(total):
        raise FloatingPointError("non-finite quadrature result")
    return total
