"""Assembly of the Stokes saddle-point system with point-force loads.

Block layout (before boundary elimination):

    [ A   B^T ] [u]   [load]
    [ B   -M  ] [p] = [0]

with A the vector Laplacian plus the optional div-div stabilization, B the
pressure-divergence coupling and M the pressure stabilization (zero for the
inf-sup stable pairs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import elements as el
from .quadrature import triangle_rule

_ASSEMBLY_DEGREE = 4  # exact for every family's bilinear forms


@dataclass
class SaddleSystem:
    A: sp.csr_matrix
    B: sp.csr_matrix
    M: sp.csr_matrix
    mean: np.ndarray              # integral of each pressure basis function
    load: np.ndarray = field(default=None)
    boundary_values: np.ndarray = field(default=None)


@dataclass(frozen=True)
class ConstrainedSystem:
    """System restricted to free velocity dofs after Dirichlet elimination."""

    A_ff: sp.csr_matrix
    B_f: sp.csr_matrix
    M: sp.csr_matrix
    mean: np.ndarray
    rhs_u: np.ndarray
    rhs_p: np.ndarray
    free: np.ndarray
    boundary_values: np.ndarray
    n_vel: int
    n_pressure: int


def _coo(rows, cols, vals, shape):
    return sp.coo_matrix(
        (np.asarray(vals).ravel(),
         (np.asarray(rows).ravel(), np.asarray(cols).ravel())),
        shape=shape,
    ).tocsr()


def assemble(mesh, scheme: el.SchemeSpec, dofmap: el.DofMap) -> SaddleSystem:
    rule = triangle_rule(_ASSEMBLY_DEGREE)
    lam, wq = rule.points, rule.weights
    _, inv_t, area = el.element_maps(mesh)
    m = mesh.num_elements

    vname, pname = scheme.velocity_basis, scheme.pressure_basis
    vgrad_ref = el.basis_ref_gradients(vname, lam)       # (q, nbv, 2)
    pvals = el.basis_values(pname, lam)                  # (q, nbp)
    pgrad_ref = el.basis_ref_gradients(pname, lam)
    nbv = vgrad_ref.shape[1]
    nbp = pvals.shape[1]

    # physical gradients for every element and quadrature point
    vg = np.einsum("qbj,mkj->mqbk", vgrad_ref, inv_t)    # (m, q, nbv, 2)
    pg = np.einsum("qbj,mkj->mqbk", pgrad_ref, inv_t)

    aw = area[:, None] * wq[None, :]                     # (m, q)

    # scalar stiffness
    k_loc = np.einsum("mq,mqak,mqbk->mab", aw, vg, vg)

    nvs = dofmap.n_vel_scalar
    nv = dofmap.n_velocity
    vdofs = dofmap.vel_elem_dofs                         # (m, nbv)
    rows = np.repeat(vdofs, nbv, axis=1)
    cols = np.tile(vdofs, (1, nbv))
    a_blocks = [
        _coo(rows, cols, k_loc, (nvs, nvs)),
    ]
    A = sp.block_diag([a_blocks[0], a_blocks[0]]).tocsr()

    stab = scheme.stab
    tau_div = stab.tau_div if stab else 0.0
    if tau_div > 0.0:
        dd_rows, dd_cols, dd_vals = [], [], []
        for ca in range(2):
            for cb in range(2):
                loc = tau_div * np.einsum(
                    "mq,mqa,mqb->mab", aw, vg[..., ca], vg[..., cb]
                )
                dd_rows.append(np.repeat(ca * nvs + vdofs, nbv, axis=1))
                dd_cols.append(np.tile(cb * nvs + vdofs, (1, nbv)))
                dd_vals.append(loc)
        A = A + _coo(np.concatenate(dd_rows), np.concatenate(dd_cols),
                     np.concatenate(dd_vals), (nv, nv))

    # B[q_dof, vel_dof] = -int q * d(phi)/dx_c
    np_ = dofmap.n_pressure
    pdofs = dofmap.p_elem_dofs
    b_rows, b_cols, b_vals = [], [], []
    for c in range(2):
        loc = -np.einsum("mq,qp,mqa->mpa", aw, pvals, vg[..., c])
        b_rows.append(np.repeat(pdofs, nbv, axis=1))
        b_cols.append(np.tile(c * nvs + vdofs, (1, nbp)))
        b_vals.append(loc)
    B = _coo(np.concatenate(b_rows), np.concatenate(b_cols),
             np.concatenate(b_vals), (np_, nv))

    # pressure stabilization m(p, q)
    M = sp.csr_matrix((np_, np_))
    if stab is not None:
        if stab.tau_t > 0.0:
            loc = stab.tau_t * np.einsum("mq,mqak,mqbk->mab", aw, pg, pg)
            M = M + _coo(np.repeat(pdofs, nbp, axis=1),
                         np.tile(pdofs, (1, nbp)), loc, (np_, np_))
        if stab.tau_s > 0.0 and pname == "p0":
            interior = ~mesh.boundary_edge
            ee = mesh.edge_elements[interior]
            hs = mesh.edge_length[interior]
            coef = stab.tau_s * hs * hs  # tau_s * h_S * |S|
            r = np.concatenate([ee[:, 0], ee[:, 1], ee[:, 0], ee[:, 1]])
            c_ = np.concatenate([ee[:, 0], ee[:, 1], ee[:, 1], ee[:, 0]])
            v = np.concatenate([coef, coef, -coef, -coef])
            M = M + _coo(r, c_, v, (np_, np_))

    # mean-value vector: integral of each pressure basis function
    mean = np.zeros(np_)
    loc = np.einsum("mq,qp->mp", aw, pvals)
    np.add.at(mean, pdofs.ravel(), loc.ravel())

    # duplicate-summation order can differ between (i, j) and (j, i);
    # symmetrize so A = A^T and M = M^T hold exactly
    A = (0.5 * (A + A.T)).tocsr()
    M = (0.5 * (M + M.T)).tocsr()
    return SaddleSystem(A=A, B=B, M=M, mean=mean)


def delta_load(mesh, scheme: el.SchemeSpec, dofmap: el.DofMap,
               sources) -> np.ndarray:
    """Load vector of a sum of point forces: entries are basis values at
    the source times the force components."""
    nvs = dofmap.n_vel_scalar
    load = np.zeros(dofmap.n_velocity)
    for z, f in sources:
        t = mesh.locate(z)
        lam = mesh.barycentric(z)[t]
        vals = el.basis_values(scheme.velocity_basis, lam)[0]
        dofs = dofmap.vel_elem_dofs[t]
        f = np.asarray(f, dtype=float)
        for c in range(2):
            np.add.at(load, c * nvs + dofs, f[c] * vals)
    return load


def apply_dirichlet(system: SaddleSystem, dofmap: el.DofMap,
                    g) -> ConstrainedSystem:
    """Eliminate boundary velocity dofs with prescribed values g (full
    velocity length; only boundary entries are used)."""
    g = np.asarray(g, dtype=float)
    nv = dofmap.n_velocity
    if g.shape != (nv,):
        raise ValueError("boundary data length mismatch")
    free = dofmap.free_velocity_dofs
    bdry = dofmap.boundary_velocity_dofs
    gb = np.zeros(nv)
    gb[bdry] = g[bdry]

    load = system.load if system.load is not None else np.zeros(nv)
    rhs_u = load[free] - (system.A @ gb)[free]
    rhs_p = -(system.B @ gb)
    return ConstrainedSystem(
        A_ff=system.A[free][:, free].tocsr(),
        B_f=system.B[:, free].tocsr(),
        M=system.M,
        mean=system.mean,
        rhs_u=rhs_u,
        rhs_p=rhs_p,
        free=free,
        boundary_values=gb,
        n_vel=nv,
        n_pressure=dofmap.n_pressure,
    )
