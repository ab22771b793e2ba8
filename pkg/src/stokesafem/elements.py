"""Reference element bases, discretization families and degree-of-freedom
maps for the four velocity/pressure pairs:

  taylor-hood : continuous P2 velocity, continuous P1 pressure
  mini        : continuous P1 + cubic bubble velocity, continuous P1 pressure
  stab-p1p0   : continuous P1 velocity, piecewise constant pressure
  stab-p1p1   : continuous P1 velocity, continuous P1 pressure

The stab-* families carry stabilization parameters.  Velocity components are
numbered blockwise: scalar dof i of component c is global dof
c * n_vel_scalar + i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = ("taylor-hood", "mini", "stab-p1p0", "stab-p1p1")

# constant barycentric gradients on the reference triangle
_BARY_GRAD = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class StabParams:
    """Stabilization parameters of the low-order schemes."""

    tau_div: float = 0.0
    tau_t: float = 0.0
    tau_s: float = 1.0 / 12.0
    ell: int = 0

    def __post_init__(self):
        if self.tau_div < 0 or self.tau_t < 0:
            raise ValueError("tau_div and tau_t must be nonnegative")
        if self.tau_s <= 0:
            raise ValueError("tau_s must be positive")
        if self.ell not in (0, 1):
            raise ValueError("ell must be 0 or 1")


@dataclass(frozen=True)
class SchemeSpec:
    family: str
    stab: StabParams | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError("unknown family %r" % (self.family,))
        if self.is_stabilized:
            if self.stab is None:
                if self.family == "stab-p1p0":
                    stab = StabParams(ell=0)
                else:
                    # continuous P1 pressure has no interelement jumps, so
                    # the pressure-gradient term must carry the stabilization
                    stab = StabParams(tau_t=1.0 / 12.0, ell=1)
                object.__setattr__(self, "stab", stab)
        elif self.stab is not None:
            raise ValueError("%s carries no stabilization" % self.family)

    @property
    def is_stabilized(self) -> bool:
        return self.family.startswith("stab")

    @property
    def velocity_basis(self) -> str:
        return {"taylor-hood": "p2", "mini": "p1b"}.get(self.family, "p1")

    @property
    def pressure_basis(self) -> str:
        return "p0" if self.family == "stab-p1p0" else "p1"


# ---------------------------------------------------------------------------
# reference bases (values, gradients and Hessians w.r.t. reference coords)

def _as_lam(lam):
    lam = np.asarray(lam, dtype=float)
    return np.atleast_2d(lam)


def basis_values(name: str, lam) -> np.ndarray:
    """Scalar basis values at barycentric points; shape (n, nb)."""
    lam = _as_lam(lam)
    if name == "p0":
        return np.ones((lam.shape[0], 1))
    if name == "p1":
        return lam.copy()
    if name == "p1b":
        bub = 27.0 * lam[:, 0] * lam[:, 1] * lam[:, 2]
        return np.concatenate([lam, bub[:, None]], axis=1)
    if name == "p2":
        vert = lam * (2.0 * lam - 1.0)
        edge = 4.0 * np.stack(
            [lam[:, (j + 1) % 3] * lam[:, (j + 2) % 3] for j in range(3)],
            axis=1,
        )
        return np.concatenate([vert, edge], axis=1)
    raise ValueError("unknown basis %r" % (name,))


def basis_ref_gradients(name: str, lam) -> np.ndarray:
    """Reference-coordinate gradients; shape (n, nb, 2)."""
    lam = _as_lam(lam)
    n = lam.shape[0]
    g = _BARY_GRAD
    if name == "p0":
        return np.zeros((n, 1, 2))
    if name == "p1":
        return np.broadcast_to(g, (n, 3, 2)).copy()
    if name == "p1b":
        out = np.empty((n, 4, 2))
        out[:, :3] = g
        out[:, 3] = 27.0 * (
            (lam[:, 1] * lam[:, 2])[:, None] * g[0]
            + (lam[:, 0] * lam[:, 2])[:, None] * g[1]
            + (lam[:, 0] * lam[:, 1])[:, None] * g[2]
        )
        return out
    if name == "p2":
        out = np.empty((n, 6, 2))
        for i in range(3):
            out[:, i] = (4.0 * lam[:, i] - 1.0)[:, None] * g[i]
        for j in range(3):
            a, b = (j + 1) % 3, (j + 2) % 3
            out[:, 3 + j] = 4.0 * (
                lam[:, a][:, None] * g[b] + lam[:, b][:, None] * g[a]
            )
        return out
    raise ValueError("unknown basis %r" % (name,))


def basis_ref_hessians(name: str, lam) -> np.ndarray:
    """Reference-coordinate Hessians; shape (n, nb, 2, 2)."""
    lam = _as_lam(lam)
    n = lam.shape[0]
    g = _BARY_GRAD

    def outer(u, v):
        return np.outer(u, v) + np.outer(v, u)

    if name in ("p0", "p1"):
        nb = 1 if name == "p0" else 3
        return np.zeros((n, nb, 2, 2))
    if name == "p1b":
        out = np.zeros((n, 4, 2, 2))
        out[:, 3] = 27.0 * (
            lam[:, 2][:, None, None] * outer(g[0], g[1])
            + lam[:, 1][:, None, None] * outer(g[0], g[2])
            + lam[:, 0][:, None, None] * outer(g[1], g[2])
        )
        return out
    if name == "p2":
        out = np.zeros((n, 6, 2, 2))
        for i in range(3):
            out[:, i] = 4.0 * np.outer(g[i], g[i])
        for j in range(3):
            a, b = (j + 1) % 3, (j + 2) % 3
            out[:, 3 + j] = 4.0 * outer(g[a], g[b])
        return out
    raise ValueError("unknown basis %r" % (name,))


def basis_size(name: str) -> int:
    return {"p0": 1, "p1": 3, "p1b": 4, "p2": 6}[name]


# ---------------------------------------------------------------------------
# physical-element evaluation

def element_maps(mesh):
    """Affine maps of all elements: Jacobians (M,2,2), transposed inverses
    (M,2,2) and areas."""
    coords = mesh.vertices[mesh.elements]
    jac = np.stack([coords[:, 1] - coords[:, 0],
                    coords[:, 2] - coords[:, 0]], axis=2)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1]
    inv[:, 0, 1] = -jac[:, 0, 1]
    inv[:, 1, 0] = -jac[:, 1, 0]
    inv[:, 1, 1] = jac[:, 0, 0]
    inv /= det[:, None, None]
    inv_t = np.swapaxes(inv, 1, 2)
    return jac, inv_t, 0.5 * det


def physical_gradients(ref_grad, inv_t):
    """Push reference gradients to one element: (n, nb, 2)."""
    return ref_grad @ inv_t.T


def physical_laplacians(ref_hess, inv_t):
    """Laplacians of the basis on one element: (n, nb)."""
    hess = np.einsum("ki,nbkl,lj->nbij", inv_t.T, ref_hess, inv_t.T)
    return np.trace(hess, axis1=2, axis2=3)


def basis_eval(scheme: SchemeSpec, mesh, t: int, x):
    """Velocity scalar and pressure basis values/gradients at a point of
    the closed element t."""
    lam = mesh.barycentric(x)[t]
    if np.min(lam) < -1e-10:
        raise ValueError("point %s lies outside element %d" % (x, t))
    _, inv_t_all, _ = element_maps(mesh)
    inv_t = inv_t_all[t]
    vname, pname = scheme.velocity_basis, scheme.pressure_basis
    return {
        "velocity_values": basis_values(vname, lam)[0],
        "velocity_gradients": physical_gradients(
            basis_ref_gradients(vname, lam), inv_t)[0],
        "pressure_values": basis_values(pname, lam)[0],
        "pressure_gradients": physical_gradients(
            basis_ref_gradients(pname, lam), inv_t)[0],
    }


# ---------------------------------------------------------------------------
# degree-of-freedom maps

@dataclass(frozen=True)
class DofMap:
    """Global numbering for one scheme on one mesh."""

    scheme: SchemeSpec
    vel_elem_dofs: np.ndarray     # (M, nbv) scalar velocity dofs
    n_vel_scalar: int
    p_elem_dofs: np.ndarray       # (M, nbp) pressure dofs
    n_pressure: int
    vel_boundary: np.ndarray      # (n_vel_scalar,) bool
    vel_dof_coords: np.ndarray    # (n_vel_scalar, 2)

    @property
    def n_velocity(self) -> int:
        return 2 * self.n_vel_scalar

    @property
    def ndof(self) -> int:
        return self.n_velocity + self.n_pressure

    @property
    def boundary_velocity_dofs(self) -> np.ndarray:
        scalar = np.nonzero(self.vel_boundary)[0]
        return np.concatenate([scalar, scalar + self.n_vel_scalar])

    @property
    def free_velocity_dofs(self) -> np.ndarray:
        scalar = np.nonzero(~self.vel_boundary)[0]
        return np.concatenate([scalar, scalar + self.n_vel_scalar])


def build_dof_map(scheme: SchemeSpec, mesh) -> DofMap:
    nv = mesh.num_vertices
    vname = scheme.velocity_basis
    if vname == "p2":
        # vertices first, then edge midpoints (local edge j opposite vertex j)
        vel = np.concatenate(
            [mesh.elements, nv + mesh.element_edges], axis=1
        )
        n_vs = nv + mesh.num_edges
        boundary = np.concatenate(
            [mesh.boundary_vertex, mesh.boundary_edge]
        )
        coords = np.concatenate(
            [
                mesh.vertices,
                0.5 * (mesh.vertices[mesh.edges[:, 0]]
                       + mesh.vertices[mesh.edges[:, 1]]),
            ]
        )
    elif vname == "p1b":
        bub = nv + np.arange(mesh.num_elements)
        vel = np.concatenate([mesh.elements, bub[:, None]], axis=1)
        n_vs = nv + mesh.num_elements
        boundary = np.concatenate(
            [mesh.boundary_vertex,
             np.zeros(mesh.num_elements, dtype=bool)]
        )
        coords = np.concatenate(
            [mesh.vertices, mesh.vertices[mesh.elements].mean(axis=1)]
        )
    else:
        vel = mesh.elements.copy()
        n_vs = nv
        boundary = mesh.boundary_vertex.copy()
        coords = mesh.vertices.copy()

    if scheme.pressure_basis == "p1":
        p_dofs = mesh.elements.copy()
        n_p = nv
    else:
        p_dofs = np.arange(mesh.num_elements)[:, None]
        n_p = mesh.num_elements
    return DofMap(scheme, vel, n_vs, p_dofs, n_p, boundary, coords)


# ---------------------------------------------------------------------------
# evaluation of a discrete solution

class DiscreteField:
    """Evaluates a discrete (velocity, pressure) pair elementwise."""

    def __init__(self, mesh, scheme: SchemeSpec, dofmap: DofMap,
                 velocity, pressure):
        self.mesh = mesh
        self.scheme = scheme
        self.dofmap = dofmap
        self.velocity = np.asarray(velocity, dtype=float)
        self.pressure = np.asarray(pressure, dtype=float)
        self.jac, self.inv_t, self.areas = element_maps(mesh)
        n = dofmap.n_vel_scalar
        # (M, 2, nbv) velocity coefficients per element and component
        self.u_coeff = np.stack(
            [self.velocity[dofmap.vel_elem_dofs],
             self.velocity[n + dofmap.vel_elem_dofs]], axis=1
        )
        self.p_coeff = self.pressure[dofmap.p_elem_dofs]

    def _lam(self, t, pts):
        v0 = self.mesh.vertices[self.mesh.elements[t, 0]]
        ref = (np.asarray(pts, dtype=float) - v0) @ self.inv_t[t]
        return np.stack([1.0 - ref[:, 0] - ref[:, 1],
                         ref[:, 0], ref[:, 1]], axis=1)

    def velocity_at(self, t, pts):
        vals = basis_values(self.scheme.velocity_basis, self._lam(t, pts))
        return vals @ self.u_coeff[t].T  # (n, 2)

    def velocity_gradient_at(self, t, pts):
        """(n, 2, 2) array; entry [i, c, k] = d u_c / d x_k."""
        grads = physical_gradients(
            basis_ref_gradients(self.scheme.velocity_basis,
                                self._lam(t, pts)),
            self.inv_t[t],
        )
        return np.einsum("cb,nbk->nck", self.u_coeff[t], grads)

    def velocity_divergence_at(self, t, pts):
        g = self.velocity_gradient_at(t, pts)
        return g[:, 0, 0] + g[:, 1, 1]

    def pressure_at(self, t, pts):
        vals = basis_values(self.scheme.pressure_basis, self._lam(t, pts))
        return vals @ self.p_coeff[t]
