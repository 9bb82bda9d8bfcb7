"""Variational potential and the Lyapunov scalars built on it."""

import numpy as np
import pytest

from hypflow import instances
from hypflow.conformal import boundary_lengths
from hypflow.energy import (
    c_value,
    lyapunov_values,
    potential_phi,
    psi_gap,
    segment_flux,
    upsilon_value,
)
from hypflow.errors import InadmissibleFactor, QuadratureStall
from hypflow.jacobian import boundary_jacobian
from hypflow.newton import solve_prescribed


def test_potential_vanishes_at_base_point(pants, symmetric_l0):
    assert potential_phi(pants, symmetric_l0, np.zeros(3)) == 0.0
    c = np.array([0.1, -0.1, 0.2])
    assert potential_phi(pants, symmetric_l0, c, base_point=c) == 0.0


def test_path_independence(pants, symmetric_l0):
    # straight segment versus a two-leg path through an intermediate point
    rng = np.random.default_rng(0)
    for _ in range(10):
        w = rng.uniform(-0.15, 0.5, 3)
        mid = rng.uniform(-0.15, 0.5, 3)
        direct = potential_phi(pants, symmetric_l0, w)
        legs = (segment_flux(pants, symmetric_l0, np.zeros(3), mid)
                + segment_flux(pants, symmetric_l0, mid, w))
        assert abs(direct - legs) < 1e-8


def test_gradient_is_minus_boundary_lengths(pants, symmetric_l0):
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(5):
        w = rng.uniform(-0.15, 0.5, 3)
        B = boundary_lengths(pants, symmetric_l0, w)
        for q in range(3):
            bump = np.zeros(3)
            bump[q] = h
            fd = (potential_phi(pants, symmetric_l0, w + bump)
                  - potential_phi(pants, symmetric_l0, w - bump)) / (2 * h)
            assert abs(fd + B[q]) / abs(B[q]) < 1e-6


def test_hessian_is_minus_jacobian(pants, symmetric_l0):
    w = np.array([0.15, -0.05, 0.25])
    L = boundary_jacobian(pants, symmetric_l0, w)
    h = 1e-4
    H = np.zeros((3, 3))
    for q in range(3):
        bump = np.zeros(3)
        bump[q] = h
        gp = -boundary_lengths(pants, symmetric_l0, w + bump)
        gm = -boundary_lengths(pants, symmetric_l0, w - bump)
        H[:, q] = (gp - gm) / (2 * h)
    assert np.max(np.abs(H - (-L))) < 1e-4


def test_lyapunov_values_at_critical_point(pants, symmetric_l0):
    targets = np.array([1.0, 1.5, 2.0])
    w_star = solve_prescribed(pants, symmetric_l0, targets, tol=1e-12).w_star
    rec = lyapunov_values(pants, symmetric_l0, w_star, targets, p=1.0, w_star=w_star)
    assert abs(rec.lambda_val) < 1e-12
    assert abs(rec.xi) < 1e-12
    assert rec.c_val < 1e-20


def test_lyapunov_positive_away_from_critical_point(pants, symmetric_l0):
    targets = np.array([1.0, 1.5, 2.0])
    w_star = solve_prescribed(pants, symmetric_l0, targets).w_star
    rng = np.random.default_rng(2)
    for _ in range(10):
        w = rng.uniform(-0.15, 0.5, 3)
        rec = lyapunov_values(pants, symmetric_l0, w, targets, p=0.7, w_star=w_star)
        assert rec.lambda_val > 0
        assert rec.xi > 0
        # the scalars decompose as psi gap plus penalty
        gap = psi_gap(pants, symmetric_l0, w, w_star, targets)
        assert abs(rec.lambda_val - (gap + rec.c_val)) < 1e-10
        assert abs(rec.xi - (gap + rec.upsilon)) < 1e-10


def test_upsilon_reduces_to_c_at_p_zero(pants, symmetric_l0):
    targets = np.array([1.0, 1.5, 2.0])
    rng = np.random.default_rng(3)
    for _ in range(10):
        w = rng.uniform(-0.15, 0.5, 3)
        B = boundary_lengths(pants, symmetric_l0, w)
        assert upsilon_value(B, targets, 0.0) == c_value(B, targets)
        rec = lyapunov_values(pants, symmetric_l0, w, targets, p=0.0)
        assert rec.upsilon == rec.c_val
        assert np.isnan(rec.lambda_val)  # no w_star supplied


def test_gap_values_independent_of_base_point(pants, symmetric_l0):
    targets = np.array([1.0, 1.5, 2.0])
    w_star = solve_prescribed(pants, symmetric_l0, targets).w_star
    w = np.array([0.3, 0.1, -0.1])
    a = lyapunov_values(pants, symmetric_l0, w, targets, p=1.0, w_star=w_star)
    b = lyapunov_values(pants, symmetric_l0, w, targets, p=1.0, w_star=w_star,
                        base_point=np.array([0.2, 0.2, 0.2]))
    assert abs(a.lambda_val - b.lambda_val) < 1e-12
    assert abs(a.xi - b.xi) < 1e-12
    # phi itself does shift with the base point
    assert a.phi != b.phi


def test_psi_strictly_convex_on_segments(pants, symmetric_l0):
    targets = np.array([1.0, 1.5, 2.0])
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = rng.uniform(-0.15, 0.5, 3)
        b = rng.uniform(-0.15, 0.5, 3)
        if np.max(np.abs(a - b)) < 1e-3:
            continue
        mid = 0.5 * (a + b)
        # 1/2 psi(a) + 1/2 psi(b) - psi(mid), written with two half-segment
        # integrals so nothing cancels
        excess = 0.5 * (psi_gap(pants, symmetric_l0, a, mid, targets)
                        + psi_gap(pants, symmetric_l0, b, mid, targets))
        assert excess > 0


def test_gradient_of_psi_vanishes_at_w_star(pants, symmetric_l0):
    targets = np.array([1.0, 1.5, 2.0])
    w_star = solve_prescribed(pants, symmetric_l0, targets, tol=1e-12).w_star
    grad = targets - boundary_lengths(pants, symmetric_l0, w_star)
    assert np.max(np.abs(grad)) < 1e-6


def test_segment_flux_validates_endpoints(pants, symmetric_l0):
    with pytest.raises(InadmissibleFactor):
        segment_flux(pants, symmetric_l0, np.zeros(3), np.full(3, -1.0))
    with pytest.raises(InadmissibleFactor):
        potential_phi(pants, symmetric_l0, np.full(3, -1.0))


def test_quadrature_stall_is_detectable(pants, symmetric_l0):
    # a budget of zero refinements never produces two agreeing levels
    with pytest.raises(QuadratureStall):
        segment_flux(pants, symmetric_l0, np.zeros(3), np.array([0.5, 0.4, 0.3]),
                     max_refinements=0)


def test_scalar_penalties():
    B = np.array([1.0, 2.0])
    t = np.array([1.0, 1.0])
    assert c_value(B, t) == 1.0
    assert c_value(t, t) == 0.0
    assert upsilon_value(B, t, 1.0) == 0.5
    assert upsilon_value(B, t, 2.0) == 0.25
