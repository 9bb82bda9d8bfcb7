"""Right-angled hyperbolic hexagon trigonometry.

A right-angled hexagon is determined up to isometry by three alternating side
lengths (a_0, a_1, a_2).  The remaining three sides, the arcs, satisfy the
hexagon cosine rule

    cosh t_m = (cosh a_m + cosh a_{m+1} cosh a_{m+2}) / (sinh a_{m+1} sinh a_{m+2})

with indices mod 3, where t_m is the arc opposite side a_m.  The right-hand
side exceeds 1 for every positive side triple, so the arcs always exist.

Evaluating arccosh of that ratio directly loses half the significant digits
when the ratio is near 1 (two long sides, short opposite side).  Using
cosh a_{m+1} cosh a_{m+2} = cosh(a_{m+1} - a_{m+2}) + sinh a_{m+1} sinh a_{m+2}
the excess over 1 comes out in closed form,

    u_m = cosh t_m - 1 = (cosh a_m + cosh(a_{m+1} - a_{m+2})) / (sinh a_{m+1} sinh a_{m+2})

which is free of cancellation, and t_m = log1p(u_m + sqrt(u_m (u_m + 2))).

For the derivatives, write h = cosh^2 a_0 + cosh^2 a_1 + cosh^2 a_2
+ 2 cosh a_0 cosh a_1 cosh a_2 - 1.  Differentiating the cosine rule and using
sinh t_m sinh a_{m+1} sinh a_{m+2} = sqrt(h) (same identity for every m) gives

    dt_m/da_m = sinh a_m / sqrt(h)
    dt_m/da_q = -sinh a_m cosh t_r / sqrt(h)   (q != m, r the third index)

All functions accept arrays of shape (..., 3) and vectorize over the leading
axes.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFinite

# cosh and the products entering h overflow well before sides reach 710;
# flows never get near this, so treat it as a hard error instead of clamping
SIDE_LIMIT = 350.0


def _check_sides(sides: np.ndarray) -> np.ndarray:
    s = np.asarray(sides, dtype=float)
    if s.shape[-1] != 3:
        raise ValueError(f"sides must have shape (..., 3), got {s.shape}")
    if not np.all(np.isfinite(s)) or np.any(s <= 0.0):
        raise ValueError("side lengths must be positive and finite")
    if np.any(s > SIDE_LIMIT):
        raise NonFinite(f"side length exceeds {SIDE_LIMIT}; hexagon out of double range")
    return s


def opposite_arcs(sides) -> np.ndarray:
    """Arc lengths of the right-angled hexagon with the given alternating sides.

    ``arcs[..., m]`` is the arc opposite ``sides[..., m]``.
    """
    s = _check_sides(sides)
    s1 = np.roll(s, -1, axis=-1)
    s2 = np.roll(s, -2, axis=-1)
    with np.errstate(over="ignore"):
        u = (np.cosh(s) + np.cosh(s1 - s2)) / (np.sinh(s1) * np.sinh(s2))
        arcs = np.log1p(u + np.sqrt(u * (u + 2.0)))
    if not np.all(np.isfinite(arcs)):
        raise NonFinite("arc computation overflowed")
    return arcs


def arc_side_jacobian(sides) -> np.ndarray:
    """Analytic Jacobian ``J[..., m, q] = d arcs[..., m] / d sides[..., q]``.

    Diagonal entries are positive (lengthening the opposite side lengthens the
    arc); off-diagonal entries are negative.
    """
    s = _check_sides(sides)
    s1 = np.roll(s, -1, axis=-1)
    s2 = np.roll(s, -2, axis=-1)
    with np.errstate(over="ignore"):
        u = (np.cosh(s) + np.cosh(s1 - s2)) / (np.sinh(s1) * np.sinh(s2))
        cosh_arcs = 1.0 + u

        ch = np.cosh(s)
        h = np.sum(ch * ch, axis=-1) + 2.0 * np.prod(ch, axis=-1) - 1.0
    if not np.all(np.isfinite(h)):
        raise NonFinite("hexagon invariant overflowed")
    inv_sqrt_h = 1.0 / np.sqrt(h)
    sh = np.sinh(s)

    jac = np.empty(s.shape + (3,), dtype=float)
    for m in range(3):
        for q in range(3):
            if m == q:
                jac[..., m, q] = sh[..., m] * inv_sqrt_h
            else:
                r = 3 - m - q
                jac[..., m, q] = -sh[..., m] * cosh_arcs[..., r] * inv_sqrt_h
    if not np.all(np.isfinite(jac)):
        raise NonFinite("arc Jacobian overflowed")
    return jac
