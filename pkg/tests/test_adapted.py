import math
from fractions import Fraction

import numpy as np
import pytest

from engel_gmt.adapted import (
    GRAPH_INDEX,
    adapted_frame,
    rotated_coefficients,
    rotation_basis,
    strata_ranks,
)
from engel_gmt.algebra import STANDARD, StructureCoefficients
from engel_gmt.surfaces import canonical_chart, chart_from_strings

F = Fraction


def test_strata_ranks_of_coordinate_planes():
    one, zero = F(1), F(0)
    assert strata_ranks([[zero, zero], [one, zero], [zero, one], [zero, zero]]) == ((1, 1, 0), (zero, one))
    assert strata_ranks([[one, zero], [zero, zero], [zero, zero], [zero, one]])[0] == (1, 0, 1)
    assert strata_ranks([[zero, zero], [zero, zero], [one, zero], [zero, one]])[0] == (0, 1, 1)
    assert strata_ranks([[one, zero], [zero, one], [zero, zero], [zero, zero]])[0] == (2, 0, 0)


def test_rotation_preserves_structure():
    for a in (0.3, -1.2, math.pi / 2):
        xi = rotated_coefficients(STANDARD, a)
        assert xi.xi12 == 1.0
        assert math.hypot(xi.xi13, xi.xi23) == pytest.approx(1.0)
        M = rotation_basis(a)
        assert np.allclose(M.T @ M, np.eye(4))


def test_vertical_plane_adapted_frame():
    rep = adapted_frame(canonical_chart("vplane"), (0, 0))
    assert rep.alphas == (1, 1, 0) and rep.degree == 3
    assert rep.graph_indices == (1, 3)
    assert rep.xi_new.xi13 == 0.0
    assert np.allclose(rep.jacobian0[[0, 2]], np.eye(2))


@pytest.mark.parametrize("name,graph,degree", [("plane14", (1, 4), 4), ("plane34", (3, 4), 5),
                                               ("vplane", (1, 3), 3)])
def test_graph_indices(name, graph, degree):
    rep = adapted_frame(canonical_chart(name), (F(1, 4), F(-1, 5)))
    assert rep.graph_indices == graph and rep.degree == degree
    assert GRAPH_INDEX[rep.alphas] == tuple(g - 1 for g in graph)


def test_graph_chart_inverts_projection():
    s = chart_from_strings(["u1", "u2", "u1/2 + u1*u2/2", "u1^2*u2/12"])
    rep = adapted_frame(s, (F(1, 3), F(1, 4)))
    ch = rep.chart
    z1 = np.linspace(-0.1, 0.1, 7)
    z2 = np.linspace(0.08, -0.08, 7)
    P = ch.point_array(z1, z2)
    assert np.array_equal(P[0], z1) and np.array_equal(P[2], z2)
    assert ch.last_residual <= 1e-12
    # graph point sits on the recentred, rotated surface
    w1, w2, _, _ = ch.solve(z1, z2)
    direct = np.stack([p(w1, w2) for p in ch.psi])
    assert np.allclose(direct, P, atol=1e-13)
    # jacobian by finite differences
    h = 1e-6
    J = ch.jacobian_array(np.array(0.03), np.array(-0.02))
    fd = (ch.point_array(np.array(0.03 + h), np.array(-0.02)) - ch.point_array(np.array(0.03 - h), np.array(-0.02))) / (2 * h)
    assert np.allclose(J[:, 0], fd, atol=1e-7)


def test_non_polynomial_rejected():
    from engel_gmt.surfaces import CallableChart

    c = CallableChart(lambda a, b: None, lambda a, b: None, ((-1, 1), (-1, 1)))
    with pytest.raises(TypeError):
        adapted_frame(c, (0, 0))


def test_general_structure_coefficients():
    from engel_gmt.poly import variables
    from engel_gmt.surfaces import SurfaceChart, surface_degree

    xi = StructureCoefficients(F(2), F(1, 3), F(-3, 2))
    # span{e2, e3} is no longer a subalgebra
    assert surface_degree(canonical_chart("vplane", xi=xi), 9).degree == 5
    # the horizontal direction commuting with e3 is (xi23, -xi13)
    u1, u2 = variables(2)
    plane = SurfaceChart([xi.xi23 * u1, -xi.xi13 * u1, u2, u1 * 0], xi=xi)
    s = plane.translate((F(1, 5), 0, F(-1, 3), F(2, 7)))
    assert surface_degree(s, 9).degree == 3
    rep = adapted_frame(s, (F(1, 4), F(1, 4)))
    assert rep.degree == 3
    assert abs(rep.xi_new.xi13) < 1e-12
