"""Adaptive Gauss-Legendre quadrature for smooth densities on intervals.

A fixed-order Gauss-Legendre panel is compared against its two-panel
bisection; where the two disagree beyond the tolerance the interval is split
recursively.  Integrands must accept numpy arrays of nodes.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure

_ORDER = 10
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(_ORDER)

DEFAULT_REL_TOL = 1e-10
_ABS_FLOOR = 1e-300  # guards the relative test when the integral underflows


def _panel(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(_WEIGHTS @ np.asarray(f(mid + half * _NODES), dtype=float))


def adaptive_gauss_legendre(
    f,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    max_depth: int = 48,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to the requested relative accuracy.

    Parameters
    ----------
    f : callable
        Vectorized integrand mapping an ndarray of points to values.
    a, b : float
        Integration limits, ``a < b``.
    rel_tol : float
        Relative error target, judged panel against bisected panels.
    max_depth : int
        Bisection depth limit before giving up.

    Raises
    ------
    QuadratureFailure
        When some subinterval cannot reach the tolerance within the depth
        limit.
    """
    if not b > a:
        raise QuadratureFailure(f"empty interval [{a}, {b}]")

    def recurse(lo: float, hi: float, whole: float, depth: int) -> float:
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        refined = left + right
        if abs(refined - whole) <= rel_tol * abs(refined) + _ABS_FLOOR:
            return refined
        if depth >= max_depth:
            raise QuadratureFailure(
                f"no convergence on [{lo}, {hi}] after depth {depth}"
            )
        return recurse(lo, mid, left, depth + 1) + recurse(mid, hi, right, depth + 1)

    return recurse(float(a), float(b), _panel(f, float(a), float(b)), 0)
