"""Discrete conformal deformation of a base metric and boundary lengths.

A conformal factor assigns one real w_i to each boundary component and
deforms every edge length through

    cosh(l_e / 2) = exp(w_i + w_j) * cosh(l0_e / 2)

where i, j are the endpoints of edge e (a self-edge contributes w_i twice).
The deformed length exists iff the argument exceeds 1, i.e. iff

    margin_e = w_i + w_j + ln cosh(l0_e / 2) > 0.

The admissible set is the intersection of these open half-spaces, hence
convex.  Boundary component i has geodesic length B_i equal to the sum of the
hexagon arcs at every face corner labeled i.

`boundary_lengths` and the helpers accept a batch of factors, shape (..., n),
and return matching leading axes; the flow integrator and the quadrature in
the energy module rely on this to evaluate many states per call.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InadmissibleFactor, MeshFormatError, NonFinite
from .hexagon import opposite_arcs
from .triangulation import IdealTriangulation

# corner slot m holds the arc opposite side slot (m + 2) % 3
CORNER_TO_OPPOSITE_SIDE = (2, 0, 1)


def log_cosh_half(l0) -> np.ndarray:
    """ln cosh(l0/2), stable for large arguments."""
    x = np.asarray(l0, dtype=float) / 2.0
    return x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0)


def _check_metric(tri: IdealTriangulation, l0) -> np.ndarray:
    l0 = np.asarray(l0, dtype=float)
    if l0.shape != (tri.n_edges,):
        raise ValueError(f"metric must have shape ({tri.n_edges},), got {l0.shape}")
    if not np.all(np.isfinite(l0)) or np.any(l0 <= 0.0):
        raise ValueError("base metric entries must be positive and finite")
    return l0


def _check_factor(tri: IdealTriangulation, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != tri.n_boundaries:
        raise ValueError(
            f"factor must have trailing dimension {tri.n_boundaries}, got shape {w.shape}"
        )
    if not np.all(np.isfinite(w)):
        raise ValueError("conformal factor entries must be finite")
    return w


def admissibility_margin(tri: IdealTriangulation, l0, w) -> np.ndarray:
    """Per-edge margins, shape (..., |E|); w is admissible iff all are > 0."""
    l0 = _check_metric(tri, l0)
    w = _check_factor(tri, w)
    i, j = tri.edge_ij[:, 0], tri.edge_ij[:, 1]
    return w[..., i] + w[..., j] + log_cosh_half(l0)


def deform(tri: IdealTriangulation, l0, w) -> np.ndarray:
    """Deformed edge lengths, shape (..., |E|).

    Raises InadmissibleFactor (carrying the offending edge index) if any
    margin is non-positive; for a batch, the first offending edge of the
    first offending state.
    """
    margin = admissibility_margin(tri, l0, w)
    if np.any(margin <= 0.0):
        flat = margin.reshape(-1, tri.n_edges)
        state = int(np.argmax(np.any(flat <= 0.0, axis=1)))
        edge = int(np.argmax(flat[state] <= 0.0))
        raise InadmissibleFactor(
            f"admissibility violated on edge {edge} (margin {flat[state][edge]:.3e})",
            edge_index=edge,
        )
    # l = 2 arccosh(e^margin); expm1 keeps precision for margins near 0.
    # Overflow is legal input here (flow trial steps probe far states), so
    # silence the warning and signal through the explicit finiteness check.
    with np.errstate(over="ignore"):
        u = np.expm1(margin)
        lengths = 2.0 * np.log1p(u + np.sqrt(u * (u + 2.0)))
    if not np.all(np.isfinite(lengths)):
        raise NonFinite("deformed length overflowed double precision")
    return lengths


def corner_arcs(tri: IdealTriangulation, l0, w) -> np.ndarray:
    """Arc lengths at each face corner slot, shape (..., |F|, 3)."""
    lengths = deform(tri, l0, w)
    sides = lengths[..., tri.face_sides]
    arcs = opposite_arcs(sides)
    return arcs[..., CORNER_TO_OPPOSITE_SIDE]


def boundary_lengths(tri: IdealTriangulation, l0, w) -> np.ndarray:
    """Geodesic boundary lengths B, shape (..., n)."""
    theta = corner_arcs(tri, l0, w)
    flat = theta.reshape(theta.shape[:-2] + (3 * tri.n_faces,))
    return flat @ tri.corner_scatter


def dumps_metric(l0) -> str:
    return json.dumps([float(v) for v in np.asarray(l0, dtype=float)]) + "\n"


def loads_metric(text: str) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, list) or not all(isinstance(v, (int, float)) for v in doc):
        raise MeshFormatError("metric file must be a JSON array of numbers")
    arr = np.asarray(doc, dtype=float)
    if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise MeshFormatError("metric entries must be positive finite numbers")
    return arr


def save_metric(l0, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_metric(l0))


def load_metric(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_metric(fh.read())
