import numpy as np
import pytest

from stokesafem.elements import (
    DiscreteField,
    SchemeSpec,
    StabParams,
    basis_eval,
    basis_ref_gradients,
    basis_size,
    basis_values,
    build_dof_map,
)
from stokesafem.mesh import DomainSpec, build_initial_mesh


def test_scheme_validation():
    with pytest.raises(ValueError):
        SchemeSpec("p3-p2")
    with pytest.raises(ValueError):
        SchemeSpec("taylor-hood", StabParams())
    with pytest.raises(ValueError):
        StabParams(tau_s=0.0)
    with pytest.raises(ValueError):
        StabParams(ell=2)


def test_stab_defaults():
    s0 = SchemeSpec("stab-p1p0")
    assert s0.stab.tau_div == 0.0
    assert s0.stab.tau_s == pytest.approx(1.0 / 12.0)
    assert s0.stab.ell == 0


def test_p1_vertex_values():
    vals = basis_values("p1", np.eye(3))
    assert np.allclose(vals, np.eye(3))


def test_p2_edge_midpoint():
    # midpoint of the edge opposite vertex 0
    lam = np.array([[0.0, 0.5, 0.5]])
    vals = basis_values("p2", lam)[0]
    assert vals[3] == pytest.approx(1.0)   # edge function of edge 0
    assert vals[1] == pytest.approx(0.0)
    assert vals[2] == pytest.approx(0.0)


def test_bubble_at_barycenter():
    lam = np.array([[1.0, 1.0, 1.0]]) / 3.0
    assert basis_values("p1b", lam)[0, 3] == pytest.approx(1.0)


def test_partition_of_unity():
    rng = np.random.default_rng(5)
    lam = rng.dirichlet((1, 1, 1), size=50)
    for name in ("p1", "p2"):
        sums = basis_values(name, lam).sum(axis=1)
        assert np.allclose(sums, 1.0, atol=1e-14)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(8)
    step = 1e-5
    for name in ("p1", "p1b", "p2"):
        lam = rng.dirichlet((2, 2, 2), size=10)
        grads = basis_ref_gradients(name, lam)
        for i, l0 in enumerate(lam):
            for k in range(2):
                lp = l0.copy()
                lm = l0.copy()
                # reference coords are (lam1, lam2); lam0 = 1 - lam1 - lam2
                lp[k + 1] += step
                lp[0] -= step
                lm[k + 1] -= step
                lm[0] += step
                fd = (basis_values(name, lp)[0]
                      - basis_values(name, lm)[0]) / (2 * step)
                assert np.allclose(fd, grads[i, :, k], atol=1e-6)


def test_trace_continuity_across_edges():
    mesh = build_initial_mesh(DomainSpec("square", 2))
    for family in ("taylor-hood", "mini", "stab-p1p0"):
        scheme = SchemeSpec(family)
        dofmap = build_dof_map(scheme, mesh)
        rng = np.random.default_rng(13)
        coeff = rng.normal(size=dofmap.n_velocity)
        field = DiscreteField(mesh, scheme, dofmap, coeff,
                              np.zeros(dofmap.n_pressure))
        interior = np.nonzero(~mesh.boundary_edge)[0]
        ts = np.linspace(0.1, 0.9, 5)
        for s in interior:
            a, b = mesh.vertices[mesh.edges[s]]
            pts = a[None, :] + ts[:, None] * (b - a)[None, :]
            t_plus, t_minus = mesh.edge_elements[s]
            va = field.velocity_at(t_plus, pts)
            vb = field.velocity_at(t_minus, pts)
            assert np.allclose(va, vb, atol=1e-13)


def test_dof_counts_taylor_hood():
    mesh = build_initial_mesh(DomainSpec("square", 1))
    dofmap = build_dof_map(SchemeSpec("taylor-hood"), mesh)
    assert dofmap.n_velocity == 18
    assert dofmap.free_velocity_dofs.size == 2
    assert dofmap.n_pressure == 4


def test_dof_counts_stab_p1p0():
    mesh = build_initial_mesh(DomainSpec("square", 1))
    dofmap = build_dof_map(SchemeSpec("stab-p1p0"), mesh)
    assert dofmap.n_velocity == 8
    assert dofmap.free_velocity_dofs.size == 0
    assert dofmap.n_pressure == 2


def test_dof_counts_mini():
    mesh = build_initial_mesh(DomainSpec("square", 1))
    dofmap = build_dof_map(SchemeSpec("mini"), mesh)
    assert dofmap.n_velocity == 12
    assert dofmap.free_velocity_dofs.size == 4


def test_ndof_definition():
    mesh = build_initial_mesh(DomainSpec("square", 3))
    for family in ("taylor-hood", "mini", "stab-p1p0", "stab-p1p1"):
        dofmap = build_dof_map(SchemeSpec(family), mesh)
        assert dofmap.ndof == dofmap.n_velocity + dofmap.n_pressure


def test_basis_eval_outside_raises():
    mesh = build_initial_mesh(DomainSpec("square", 1))
    with pytest.raises(ValueError):
        basis_eval(SchemeSpec("taylor-hood"), mesh, 0, (-0.5, -0.5))


def test_basis_size():
    assert basis_size("p0") == 1
    assert basis_size("p1") == 3
    assert basis_size("p1b") == 4
    assert basis_size("p2") == 6
