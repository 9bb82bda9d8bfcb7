"""Damped Newton solver for the prescribed boundary-length problem.

Finding w* with B(w*) = b is the critical-point equation of the strictly
convex psi, so Newton on grad psi = b - B with Hessian -L (symmetric positive
definite) plus a backtracking line search is globally convergent.  Each trial
step must keep every admissibility margin at or above `safety` and decrease
psi by the Armijo fraction of the predicted slope; psi decrements are
measured by the line-integral form (see the energy module) to avoid
cancellation near the solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .conformal import admissibility_margin, boundary_lengths
from .errors import EigSolveFailure, LineSearchFailure, MaxIterations
from .jacobian import boundary_jacobian
from .energy import segment_flux
from .triangulation import IdealTriangulation

ARMIJO = 1e-4
ALPHA_FLOOR = 1e-12


@dataclass(frozen=True)
class SolveReport:
    w_star: np.ndarray
    iterations: int
    final_residual: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "w_star": [float(v) for v in self.w_star],
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "converged": self.converged,
        }


def solve_prescribed(
    tri: IdealTriangulation,
    l0,
    targets,
    w_init=None,
    tol: float = 1e-8,
    max_iterations: int = 200,
    safety: float = 1e-6,
) -> SolveReport:
    """Solve B(w*) = targets by damped Newton descent on psi.

    Raises MaxIterations or LineSearchFailure (both carrying the partial
    report) when the iteration or the backtracking stalls; raises
    EigSolveFailure if the Hessian factorization fails, which signals that
    the iterate left the region where -L is trustworthy.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (tri.n_boundaries,) or np.any(targets <= 0.0):
        raise ValueError("targets must be strictly positive, one per boundary component")
    w = (
        np.zeros(tri.n_boundaries)
        if w_init is None
        else np.asarray(w_init, dtype=float).copy()
    )

    B = boundary_lengths(tri, l0, w)
    residual = float(np.max(np.abs(B - targets)))
    iterations = 0
    while residual >= tol:
        if iterations >= max_iterations:
            raise MaxIterations(
                f"no convergence after {max_iterations} iterations (residual {residual:.3e})",
                report=SolveReport(w, iterations, residual, False),
            )
        L = boundary_jacobian(tri, l0, w)
        try:
            factor = scipy.linalg.cho_factor(-L)
        except scipy.linalg.LinAlgError as exc:
            raise EigSolveFailure(f"Cholesky factorization of -L failed: {exc}") from exc
        step = scipy.linalg.cho_solve(factor, B - targets)
        slope = float((targets - B) @ step)  # grad psi . step, negative

        alpha = 1.0
        while True:
            w_try = w + alpha * step
            if np.min(admissibility_margin(tri, l0, w_try)) >= safety:
                decrement = segment_flux(tri, l0, w, w_try, targets=targets, rtol=1e-12)
                if decrement <= ARMIJO * alpha * slope:
                    break
            alpha *= 0.5
            if alpha < ALPHA_FLOOR:
                raise LineSearchFailure(
                    f"backtracking stalled at iteration {iterations} (residual {residual:.3e})",
                    report=SolveReport(w, iterations, residual, False),
                )
        w = w_try
        B = boundary_lengths(tri, l0, w)
        residual = float(np.max(np.abs(B - targets)))
        iterations += 1
    return SolveReport(w, iterations, residual, True)
