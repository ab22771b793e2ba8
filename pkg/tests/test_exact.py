import types

import numpy as np
import pytest

from stokesafem.elements import SchemeSpec, build_dof_map
from stokesafem.exact import (
    StokesletSpec,
    boundary_interpolant,
    stokeslet,
    stokeslet_gradient,
    weighted_error,
)
from stokesafem.mesh import DomainSpec, build_initial_mesh
from stokesafem.quadrature import SingularityError, WeightSpec

SPEC = StokesletSpec((0.5, 0.5), (1.0, 1.0))


def test_point_values():
    u, p = stokeslet(SPEC, (1.0, 0.5))
    assert u[0] == pytest.approx(0.1347375, abs=2e-6)
    assert u[1] == pytest.approx(0.0551589, abs=5e-7)
    assert p == pytest.approx(0.3183099, abs=5e-7)
    # closed form: u_x = (1 + log 2) / (4 pi), u_y = (log 2) / (4 pi)
    assert u[0] == pytest.approx((1 + np.log(2)) / (4 * np.pi), rel=1e-13)


def test_pressure_antisymmetry():
    rng = np.random.default_rng(4)
    for _ in range(10):
        r = rng.normal(size=2) * 0.2
        _, p_plus = stokeslet(SPEC, SPEC.z + r)
        _, p_minus = stokeslet(SPEC, SPEC.z - r)
        assert p_plus == pytest.approx(-p_minus, rel=1e-12)


def test_velocity_divergence_free():
    step = 1e-4
    x = np.array([1.0, 0.5])
    div = 0.0
    for k in range(2):
        e = np.zeros(2)
        e[k] = step
        up, _ = stokeslet(SPEC, x + e)
        um, _ = stokeslet(SPEC, x - e)
        div += (up[k] - um[k]) / (2 * step)
    assert abs(div) <= 1e-6


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    step = 1e-6
    for _ in range(10):
        x = rng.uniform(0, 1, size=2)
        if np.hypot(*(x - SPEC.z)) < 0.1:
            continue
        g = stokeslet_gradient(SPEC, x)
        for k in range(2):
            e = np.zeros(2)
            e[k] = step
            fd = (stokeslet(SPEC, x + e)[0]
                  - stokeslet(SPEC, x - e)[0]) / (2 * step)
            assert np.allclose(fd, g[:, k], atol=1e-8)


def test_pde_residual_central_differences():
    step = 1e-3
    for x in (np.array([0.9, 0.2]), np.array([0.1, 0.8])):
        lap = np.zeros(2)
        for k in range(2):
            e = np.zeros(2)
            e[k] = step
            lap += (stokeslet(SPEC, x + e)[0]
                    - 2 * stokeslet(SPEC, x)[0]
                    + stokeslet(SPEC, x - e)[0]) / step ** 2
        grad_p = np.array([
            (stokeslet(SPEC, x + np.array([step, 0]))[1]
             - stokeslet(SPEC, x - np.array([step, 0]))[1]) / (2 * step),
            (stokeslet(SPEC, x + np.array([0, step]))[1]
             - stokeslet(SPEC, x - np.array([0, step]))[1]) / (2 * step),
        ])
        scale = max(1.0, np.max(np.abs(stokeslet_gradient(SPEC, x))))
        assert np.max(np.abs(-lap + grad_p)) <= 1e-4 * scale


def test_evaluation_at_source_raises():
    with pytest.raises(SingularityError):
        stokeslet(SPEC, (0.5, 0.5))


def _zero_solution(dofmap):
    return types.SimpleNamespace(velocity=np.zeros(dofmap.n_velocity),
                                 pressure=np.zeros(dofmap.n_pressure))


def test_quotient_constant_shift_invariance():
    mesh = build_initial_mesh(DomainSpec("square", 4))
    scheme = SchemeSpec("taylor-hood")
    dofmap = build_dof_map(scheme, mesh)
    w = WeightSpec.single((0.5, 0.5), 1.5)
    base = _zero_solution(dofmap)
    shifted = types.SimpleNamespace(
        velocity=base.velocity, pressure=base.pressure + 5.0
    )
    e0 = weighted_error(mesh, base, SPEC, w, scheme, dofmap)
    e5 = weighted_error(mesh, shifted, SPEC, w, scheme, dofmap)
    assert e0["err_p"] == pytest.approx(e5["err_p"], abs=1e-12)


def test_err_u_against_brute_force_oracle():
    # u_T = 0, alpha = 1: err_u^2 = int d_z |grad u|^2 over the square
    mesh = build_initial_mesh(DomainSpec("square", 4))
    scheme = SchemeSpec("taylor-hood")
    dofmap = build_dof_map(scheme, mesh)
    w = WeightSpec.single((0.5, 0.5), 1.0)
    err = weighted_error(mesh, _zero_solution(dofmap), SPEC, w,
                         scheme, dofmap)

    n = 1000
    xs = (np.arange(n) + 0.5) / n
    xg, yg = np.meshgrid(xs, xs)
    pts = np.stack([xg.ravel(), yg.ravel()], axis=1)
    g = stokeslet_gradient(SPEC, pts)
    d = np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5)
    oracle = np.sqrt(np.sum(d * np.einsum("nck,nck->n", g, g)) / n ** 2)
    assert err["err_u"] == pytest.approx(oracle, rel=1e-3)


def test_total_is_root_sum_square():
    mesh = build_initial_mesh(DomainSpec("square", 2))
    scheme = SchemeSpec("taylor-hood")
    dofmap = build_dof_map(scheme, mesh)
    w = WeightSpec.single((0.5, 0.5), 1.5)
    err = weighted_error(mesh, _zero_solution(dofmap), SPEC, w,
                         scheme, dofmap)
    assert err["total"] == pytest.approx(
        np.hypot(err["err_u"], err["err_p"]), rel=1e-13)


def test_boundary_interpolant_values():
    mesh = build_initial_mesh(DomainSpec("square", 2))
    scheme = SchemeSpec("taylor-hood")
    dofmap = build_dof_map(scheme, mesh)
    g = boundary_interpolant([SPEC], dofmap)
    nvs = dofmap.n_vel_scalar
    bdry = np.nonzero(dofmap.vel_boundary)[0]
    for i in bdry[:6]:
        u, _ = stokeslet(SPEC, dofmap.vel_dof_coords[i])
        assert g[i] == pytest.approx(u[0], rel=1e-13)
        assert g[nvs + i] == pytest.approx(u[1], rel=1e-13)
    free_scalar = np.nonzero(~dofmap.vel_boundary)[0]
    assert np.all(g[free_scalar] == 0.0)
