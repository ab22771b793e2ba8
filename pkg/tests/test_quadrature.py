import math

import numpy as np
import pytest

from stokesafem.mesh import DomainSpec, build_initial_mesh
from stokesafem.quadrature import (
    SingularityError,
    WeightSpec,
    duffy_rule,
    edge_integral,
    segment_integral,
    triangle_rule,
    weight_eval,
    weighted_cell_integral,
    weighted_tri_integral,
)

# closed forms from polar integration over the triangle (0,0),(1,0),(1,1)
WEIGHTED_D1 = (math.sqrt(2.0) + math.log(1.0 + math.sqrt(2.0))) / 6.0
WEIGHTED_DM1 = math.log(1.0 + math.sqrt(2.0))

EX3_SOURCES = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]


def test_weight_single_point():
    w = WeightSpec.single((0.0, 0.0), 2.0 - 1e-12)
    assert weight_eval(w, (3.0, 4.0)) == pytest.approx(25.0)


def test_weight_alpha_range_enforced():
    with pytest.raises(ValueError):
        WeightSpec.single((0.0, 0.0), 2.5)
    with pytest.raises(ValueError):
        WeightSpec.single((0.0, 0.0), 0.0)


def test_weight_multi_outside_balls():
    w = WeightSpec.multi(EX3_SOURCES, 1.5, 0.25)
    assert weight_eval(w, (0.5, 0.5)) == pytest.approx(1.0)


def test_weight_multi_inside_ball():
    w = WeightSpec.multi(EX3_SOURCES, 1.5, 0.25)
    val = weight_eval(w, (0.3, 0.3))
    assert val == pytest.approx(math.sqrt(0.005) ** 1.5, rel=1e-10)
    assert val == pytest.approx(0.018803, abs=5e-7)


def test_weight_singularity_error():
    w = WeightSpec.single((0.25, 0.25), 1.0)
    with pytest.raises(SingularityError):
        weight_eval(w, (0.25, 0.25), exponent_sign=-1)


def test_weight_positive_off_sources():
    w = WeightSpec.multi(EX3_SOURCES, 1.0, 0.25)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 1, size=(200, 2))
    assert np.all(weight_eval(w, pts) > 0)


def test_triangle_rules_integrate_monomials():
    # reference-triangle monomial integrals p!q!/(p+q+2)!
    for degree in range(1, 7):
        rule = triangle_rule(degree)
        for p in range(degree + 1):
            for q in range(degree + 1 - p):
                vals = rule.points[:, 1] ** p * rule.points[:, 2] ** q
                approx = 0.5 * np.dot(rule.weights, vals)
                exact = (math.factorial(p) * math.factorial(q)
                         / math.factorial(p + q + 2))
                assert approx == pytest.approx(exact, rel=1e-13), (degree, p, q)


def test_duffy_rule_exactness():
    rule = duffy_rule(4)
    vals = rule.points[:, 1] ** 2 * rule.points[:, 2]
    assert 0.5 * np.dot(rule.weights, vals) == pytest.approx(
        math.factorial(2) / math.factorial(5), rel=1e-13)


def test_rule_weights_sum_to_one():
    for degree in range(1, 7):
        assert triangle_rule(degree).weights.sum() == pytest.approx(1.0)


def test_unweighted_area():
    tri = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    w = WeightSpec.single((5.0, 5.0), 1.0)

    def over_weight(pts):
        return 1.0 / weight_eval(w, pts)

    # weight times its reciprocal integrates the area
    val = weighted_tri_integral(tri, w, over_weight)
    assert val == pytest.approx(0.5, rel=1e-10)


def test_weighted_integral_alpha1():
    tri = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]
    w = WeightSpec.single((0.0, 0.0), 1.0)
    val = weighted_tri_integral(tri, w, lambda p: np.ones(len(p)), tol=1e-6)
    assert val == pytest.approx(WEIGHTED_D1, rel=1e-6)


def test_weighted_integral_alpha_minus1():
    tri = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]
    w = WeightSpec.single((0.0, 0.0), 1.0)
    val = weighted_tri_integral(tri, w, lambda p: np.ones(len(p)),
                                tol=1e-6, exponent_sign=-1)
    assert val == pytest.approx(WEIGHTED_DM1, rel=1e-6)


def test_weighted_cell_integral_matches_tri():
    mesh = build_initial_mesh(DomainSpec("square", 1))
    w = WeightSpec.single((0.0, 0.0), 1.0)
    a = weighted_cell_integral(mesh, 0, w, lambda p: np.ones(len(p)))
    b = weighted_tri_integral(mesh.element_coords(0), w,
                              lambda p: np.ones(len(p)))
    assert a == b


def test_multi_reduces_to_single_inside_ball():
    tri = [(0.1, 0.1), (0.3, 0.1), (0.2, 0.3)]
    single = WeightSpec.single((0.2, 0.15), 1.2)
    multi = WeightSpec.multi([(0.2, 0.15)], 1.2, 100.0)
    f = lambda p: p[:, 0] + 1.0
    a = weighted_tri_integral(tri, single, f)
    b = weighted_tri_integral(tri, multi, f)
    assert a == pytest.approx(b, rel=1e-12)


def test_multi_ball_crossing_integral():
    # weight is 1 outside the ball of radius d_Z/2 around the source
    tri = [(0.5, 0.0), (1.5, 0.0), (1.5, 1.0)]
    w = WeightSpec.multi([(0.0, 0.0)], 1.0, 1.6)
    val = weighted_tri_integral(tri, w, lambda p: np.ones(len(p)))
    # Monte Carlo oracle over the triangle
    rng = np.random.default_rng(11)
    samples = rng.dirichlet((1, 1, 1), size=400000) @ np.asarray(tri)
    acc = 0.5 * np.mean(weight_eval(w, samples))
    assert val == pytest.approx(acc, rel=5e-3)


def test_edge_integral_polynomials():
    mesh = build_initial_mesh(DomainSpec("square", 1))
    # diagonal edge from (0,0) to (1,1), length sqrt(2)
    diag = next(
        s for s in range(mesh.num_edges)
        if not mesh.boundary_edge[s]
    )
    L = mesh.edge_length[diag]
    assert edge_integral(mesh, diag, lambda p: np.ones(len(p))) == \
        pytest.approx(L, rel=1e-13)

    def arclength(p):
        return np.hypot(p[:, 0], p[:, 1])

    assert edge_integral(mesh, diag, arclength) == \
        pytest.approx(L ** 2 / 2.0, rel=1e-13)


def test_segment_integral_s_squared():
    val = segment_integral((0.0, 0.0), (2.0, 0.0), lambda p: p[:, 0] ** 2)
    assert val == pytest.approx(8.0 / 3.0, rel=1e-13)
