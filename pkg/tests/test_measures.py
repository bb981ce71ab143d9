from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from engel_gmt.algebra import AlgebraElement, bch_product
from engel_gmt.errors import DomainError
from engel_gmt.geometry import Ball, Form, coframe_forms
from engel_gmt.measures import (
    Loop,
    chart_circle,
    intrinsic_measure,
    line_integral,
    riemannian_area,
    stokes_check,
    stokes_schedule,
    surface_integral,
)
from engel_gmt.poly import variables
from engel_gmt.quadrature import Disk, QuadratureSpec, Rect, composite_matrix, integrate_rows
from engel_gmt.surfaces import CallableChart, canonical_chart, chart_from_strings

from helpers import elements


@settings(max_examples=40, deadline=None)
@given(elements, st.tuples(*[st.floats(-1, 1)] * 4))
def test_composite_matrix_matches_group_law(c, y):
    basis = np.array([1, y[0], y[1], y[2], y[3], y[0] ** 2, y[0] * y[1], y[1] ** 2])
    expect = bch_product(AlgebraElement(*(-v for v in c)), AlgebraElement(*(F(v) for v in y)))
    got = composite_matrix(c) @ basis
    assert np.allclose(got, [float(v) for v in expect], atol=1e-12)


def test_vplane_unit_square_area():
    est = riemannian_area(canonical_chart("vplane"), Rect(0, 1, 0, 1))
    assert est.value == pytest.approx(1.0, abs=1e-14)


def test_mixed_plane_area_against_scipy():
    ref, _ = integrate.dblquad(lambda y, x: np.sqrt(1 + x * x / 4 + y * y / 4), -1, 1, -1, 1)
    est = riemannian_area(canonical_chart("mixed"), q=QuadratureSpec(n=64, levels=3))
    assert abs(est.value - ref) < 1e-5
    assert abs(est.value - ref) <= 2 * est.error


def test_rect_clipped_to_domain_and_empty():
    s = canonical_chart("vplane")
    assert riemannian_area(s, Rect(0, 5, 0, 5)).value == pytest.approx(1.0)
    est = riemannian_area(s, Rect(2, 3, 2, 3))
    assert est.value == 0.0 and est.note == "empty region"


@pytest.mark.parametrize("r", [0.5, 0.25, 0.125])
def test_vplane_intrinsic_measure(r):
    est = intrinsic_measure(canonical_chart("vplane"), Ball((0, 0, 0, 0), r))
    assert est.value == pytest.approx(4 * r ** 3, rel=1e-12)


@pytest.mark.parametrize("r", [0.5, 0.3])
def test_mixed_plane_intrinsic_measure(r):
    # top block |u2|/2 over |u1| <= r, |u2| <= r^2
    est = intrinsic_measure(canonical_chart("mixed"), Ball((0, 0, 0, 0), r))
    assert est.value == pytest.approx(r ** 5, rel=1e-10)


def test_off_axis_weight_against_scipy():
    s = canonical_chart("mixed")
    est = riemannian_area(s, Rect(-0.5, 0.5, 0.1, 0.7))
    ref, _ = integrate.dblquad(lambda y, x: np.sqrt(1 + x * x / 4 + y * y / 4), -0.5, 0.5, 0.1, 0.7)
    assert abs(est.value - ref) <= est.error
    assert est.error < 1e-6


def test_far_ball_gives_zero_with_note():
    est = intrinsic_measure(canonical_chart("vplane"), Ball((5, 0, 0, 0), 0.1))
    assert est.value == 0.0
    assert "disjoint" in est.note


def test_left_translation_invariance():
    s = chart_from_strings(["u1", "u2", "u1*u2/2", "u1^2/3 - u2/5"])
    g = (F(1, 3), F(-1, 4), F(1, 5), F(2, 7))
    ball = Ball((0.1, 0.05, 0.0, 0.02), 0.3)
    moved = bch_product(AlgebraElement(*g), AlgebraElement(*(F(c) for c in ball.center)))
    a = intrinsic_measure(s, ball, degree=5)
    b = intrinsic_measure(s.translate(g), Ball(tuple(float(v) for v in moved), 0.3), degree=5)
    assert a.value > 0
    assert b.value == pytest.approx(a.value, rel=1e-6)


def test_additivity_and_monotonicity():
    s = chart_from_strings(["u1", "u2", "u1^2", "u2^3 + u1"])
    whole = riemannian_area(s, Rect(-1, 1, -1, 1))
    left = riemannian_area(s, Rect(-1, 0, -1, 1))
    right = riemannian_area(s, Rect(0, 1, -1, 1))
    assert abs(whole.value - left.value - right.value) <= whole.error + left.error + right.error
    small = intrinsic_measure(s, Ball((0, 0, 0, 0), 0.2), degree=3).value
    big = intrinsic_measure(s, Ball((0, 0, 0, 0), 0.4), degree=3).value
    assert 0 < small < big


def test_ball_needs_matching_structure():
    from engel_gmt.algebra import StructureCoefficients

    s = canonical_chart("vplane", xi=StructureCoefficients(1, 2, 0))
    with pytest.raises(ValueError):
        intrinsic_measure(s, Ball((0, 0, 0, 0), 0.3), degree=3)


def test_callable_chart_uses_monte_carlo():
    def point(u1, u2):
        return np.array([np.zeros_like(u1), u1, u2, np.zeros_like(u1)])

    def jac(u1, u2):
        z, o = np.zeros_like(u1), np.ones_like(u1)
        return np.array([[z, z], [o, z], [z, o], [z, z]])

    s = CallableChart(point, jac, ((-1, 1), (-1, 1)))
    est = intrinsic_measure(s, Ball((0, 0, 0, 0), 0.5), q=QuadratureSpec(mc_samples=200_000, seed=4), degree=3)
    assert est.method == "mc"
    assert abs(est.value - 0.5) < 5 * est.error


# ---------------------------------------------------------------- forms


def test_exact_one_form_loop_vanishes():
    y = variables(4)
    s = chart_from_strings(["u1", "u2", "u1*u2", "u2^2"])
    dy1 = Form.one_form([1, 0, 0, 0])
    assert abs(line_integral(dy1, chart_circle(s, (0, 0), 0.5)).value) < 1e-14
    closed = Form.function(y[0] * y[2]).d()
    assert abs(line_integral(closed, chart_circle(s, (0.1, 0), 0.4)).value) < 1e-13


def test_y2_dy1_around_unit_circle():
    y = variables(4)
    omega = Form.one_form([y[1], 0, 0, 0])
    est = line_integral(omega, chart_circle(canonical_chart("hplane"), (0, 0), 1))
    assert est.value == pytest.approx(-np.pi, abs=1e-13)


@pytest.mark.parametrize("r", [0.5, 0.25])
def test_d_theta3_on_hplane_disk(r):
    theta3 = coframe_forms()[2]
    est = surface_integral(theta3.d(), canonical_chart("hplane"), Disk((0, 0), r))
    assert est.value == pytest.approx(-np.pi * r * r, rel=1e-12)


def test_zero_form_integral_is_exact():
    est = surface_integral(Form(2), canonical_chart("hplane"))
    assert est.value == 0.0 and est.method == "exact"


def test_vplane_stokes_zero():
    rep = stokes_check(canonical_chart("vplane"), 0.5)
    assert rep.line.value == 0.0 and rep.surface.value == 0.0
    assert rep.prediction == 0.0 and rep.consistent


def test_stokes_defect_within_error():
    s = chart_from_strings(["u1", "u2", "u1*u2/3", "u1^2/4 + u2^3/5"])
    rep = stokes_check(s, 0.4, QuadratureSpec(n=32, levels=3), center=(0.1, -0.1))
    assert rep.defect < 1e-10
    assert rep.consistent


def test_domain_errors():
    s = canonical_chart("vplane")
    with pytest.raises(DomainError):
        stokes_check(s, 1.5)
    with pytest.raises(DomainError):
        chart_circle(s, (0.9, 0), 0.5)
    with pytest.raises(DomainError):
        riemannian_area(s, Disk((0.9, 0), 0.5))
    with pytest.raises(ValueError):
        stokes_schedule(s, [0.1, 0.2])


def test_loop_requires_closed_curve():
    with pytest.raises(ValueError):
        Loop(lambda t: np.array([t, 0 * t, 0 * t, 0 * t]), lambda t: np.ones((4, t.size)))
    with pytest.raises(TypeError):
        line_integral(Form.one_form([1, 0, 0, 0]), "circle")


def test_integrate_rows_history_levels():
    est = integrate_rows(Rect(0, 1, 0, 1), lambda s, t: s * t, QuadratureSpec(n=8, levels=4))
    assert len(est.history) == 4
    assert est.value == pytest.approx(0.25, rel=1e-12)
