"""Weighted residual error indicators and global estimators.

Each element contributes

    eta_T^2 = h_T^2 D^alpha ||lap(u) - grad(p)||_{L2(T)}^2
            + kappa ||div u||_{L2(weight, T)}^2
            + h_T D^alpha ||[[ (grad(u) - p I) nu ]]||_{L2(dT \\ bdry)}^2
            + sum_{z in T} h_T^alpha |F_z|^2

with D the (multi-)source indicator distance, kappa = 1 + tau_div^2 for the
stabilized families and 1 otherwise.  Interior edges are closed sets, so
every interior edge feeds both incident elements and a source on a shared
side feeds every containing element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elements as el
from .quadrature import (
    WeightSpec,
    _crosses_ball,
    _gauss01,
    duffy_rule,
    weight_eval,
    weighted_tri_integral,
)

_EDGE_POINTS = 4  # Gauss points per edge, exact through degree 7


@dataclass(frozen=True)
class IndicatorField:
    eta: np.ndarray
    scheme: el.SchemeSpec
    weight: WeightSpec

    @property
    def global_value(self) -> float:
        return float(np.sqrt(np.sum(self.eta ** 2)))


def global_estimator(field: IndicatorField) -> float:
    return field.global_value


def indicator_distances(mesh, w: WeightSpec) -> np.ndarray:
    """D_T = max vertex distance to the source, minimized over sources."""
    coords = mesh.vertices[mesh.elements]           # (M, 3, 2)
    diff = coords[:, None, :, :] - w.sources[None, :, None, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])     # (M, k, 3)
    return dist.max(axis=2).min(axis=1)


def _edge_flux(field: el.DiscreteField, edge_ids):
    """Normal flux (grad(u) - p I) nu from both sides of interior edges,
    evaluated at shared Gauss points.  Returns (jump, lengths)."""
    mesh = field.mesh
    tq, _ = _gauss01(_EDGE_POINTS)
    a = mesh.vertices[mesh.edges[edge_ids, 0]]
    b = mesh.vertices[mesh.edges[edge_ids, 1]]
    pts = a[:, None, :] + tq[None, :, None] * (b - a)[:, None, :]
    tang = b - a
    lengths = np.hypot(tang[:, 0], tang[:, 1])
    normal = np.stack([tang[:, 1], -tang[:, 0]], axis=1) / lengths[:, None]

    fluxes = []
    for side in (0, 1):
        tids = mesh.edge_elements[edge_ids, side]
        v0 = mesh.vertices[mesh.elements[tids, 0]]
        d = pts - v0[:, None, :]
        ref = np.einsum("nqj,njk->nqk", d, field.inv_t[tids])
        lam = np.concatenate(
            [1.0 - ref.sum(axis=2, keepdims=True), ref], axis=2
        )
        flat = lam.reshape(-1, 3)
        vname = field.scheme.velocity_basis
        gref = el.basis_ref_gradients(vname, flat)
        nbv = gref.shape[1]
        gref = gref.reshape(len(tids), -1, nbv, 2)
        gphys = np.einsum("nqbj,nkj->nqbk", gref, field.inv_t[tids])
        gradu = np.einsum("ncb,nqbk->nqck", field.u_coeff[tids], gphys)
        pname = field.scheme.pressure_basis
        pvals = el.basis_values(pname, flat).reshape(len(tids), -1,
                                                    el.basis_size(pname))
        pv = np.einsum("nqb,nb->nq", pvals, field.p_coeff[tids])
        g = gradu.copy()
        g[:, :, 0, 0] -= pv
        g[:, :, 1, 1] -= pv
        fluxes.append(np.einsum("nqck,nk->nqc", g, normal))
    # nu^- = -nu^+, so the interelement residual is the flux difference
    return fluxes[0] - fluxes[1], lengths


def jump_trace(mesh, solution, scheme: el.SchemeSpec, dofmap: el.DofMap,
               s: int):
    """Jump of the discrete normal flux across interior edge s, at the edge
    Gauss points.  Returns (points, values)."""
    if mesh.boundary_edge[s]:
        raise ValueError("edge %d is a boundary edge" % s)
    field = el.DiscreteField(mesh, scheme, dofmap,
                             solution.velocity, solution.pressure)
    jump, _ = _edge_flux(field, np.array([s]))
    tq, _w = _gauss01(_EDGE_POINTS)
    a, b = mesh.vertices[mesh.edges[s]]
    pts = a[None, :] + tq[:, None] * (b - a)[None, :]
    return pts, jump[0]


def compute_indicators(mesh, solution, scheme: el.SchemeSpec,
                       dofmap: el.DofMap, w: WeightSpec, sources,
                       tol: float = 1e-8) -> IndicatorField:
    """Per-element indicators for a discrete solution; `sources` is the
    list of (z, F) pairs of the load."""
    field = el.DiscreteField(mesh, scheme, dofmap,
                             solution.velocity, solution.pressure)
    m = mesh.num_elements
    h = mesh.h
    area = mesh.area
    d_ind = indicator_distances(mesh, w)
    d_alpha = d_ind ** w.alpha
    stab = scheme.stab
    kappa = 1.0 + (stab.tau_div ** 2 if stab else 0.0)

    eta2 = np.zeros(m)

    # interior residual: lap(u) - grad(p) is at most linear on an element
    rule = duffy_rule(2)
    lam, wq = rule.points, rule.weights
    vname, pname = scheme.velocity_basis, scheme.pressure_basis
    hess_ref = el.basis_ref_hessians(vname, lam)
    lap = np.einsum("mik,qbkl,mil->mqb", field.inv_t, hess_ref, field.inv_t)
    lap_u = np.einsum("mcb,mqb->mqc", field.u_coeff, lap)
    pg_ref = el.basis_ref_gradients(pname, lam)
    pg = np.einsum("qbj,mkj->mqbk", pg_ref, field.inv_t)
    grad_p = np.einsum("mb,mqbk->mqk", field.p_coeff, pg)
    resid = lap_u - grad_p
    aw = area[:, None] * wq[None, :]
    eta2 += h ** 2 * d_alpha * np.einsum("mq,mqc->m", aw, resid ** 2)

    # weighted divergence term
    vert_dist = np.hypot(
        *(mesh.vertices[mesh.elements][:, None, :, :]
          - w.sources[None, :, None, :]).transpose(3, 0, 1, 2)
    ).min(axis=1).min(axis=1)
    near = vert_dist <= 2.0 * h
    if w.mode == "multi":
        # elements straddling a ball boundary see a discontinuous weight
        for t in np.nonzero(~near)[0]:
            if _crosses_ball(mesh.element_coords(t), w):
                near[t] = True
    far_ids = np.nonzero(~near)[0]
    if far_ids.size:
        rule6 = duffy_rule(6)
        lam6, wq6 = rule6.points, rule6.weights
        gref6 = el.basis_ref_gradients(vname, lam6)
        # chunk the element batch to bound the per-point gradient tensors
        for lo in range(0, far_ids.size, 8192):
            ids = far_ids[lo:lo + 8192]
            gp6 = np.einsum("qbj,mkj->mqbk", gref6, field.inv_t[ids])
            div6 = np.einsum("mcb,mqbc->mq", field.u_coeff[ids], gp6)
            coords = mesh.vertices[mesh.elements[ids]]
            pts = np.einsum("qi,mik->mqk", lam6, coords)
            wvals = weight_eval(w, pts.reshape(-1, 2)).reshape(pts.shape[:2])
            aw6 = area[ids][:, None] * wq6[None, :]
            eta2[ids] += kappa * np.einsum("mq,mq,mq->m", aw6, wvals,
                                           div6 ** 2)
    for t in np.nonzero(near)[0]:
        val = weighted_tri_integral(
            mesh.element_coords(t), w,
            lambda pts, _t=t: field.velocity_divergence_at(_t, pts) ** 2,
            tol,
        )
        eta2[t] += kappa * val

    # interelement jumps, added to both incident elements
    interior = np.nonzero(~mesh.boundary_edge)[0]
    _, gw = _gauss01(_EDGE_POINTS)
    for lo in range(0, interior.size, 32768):
        eids = interior[lo:lo + 32768]
        jump, lengths = _edge_flux(field, eids)
        jsq = lengths * np.einsum("q,nqc->n", gw, jump ** 2)
        for side in (0, 1):
            tids = mesh.edge_elements[eids, side]
            np.add.at(eta2, tids, h[tids] * d_alpha[tids] * jsq)

    # point-source terms; closed elements, so shared sides count everywhere
    for z, f in sources:
        f2 = float(np.dot(f, f))
        if f2 == 0.0:
            continue
        ids = mesh.containing_elements(z)
        eta2[ids] += h[ids] ** w.alpha * f2

    return IndicatorField(np.sqrt(eta2), scheme, w)


def element_indicator(mesh, solution, scheme: el.SchemeSpec,
                      dofmap: el.DofMap, w: WeightSpec, sources,
                      t: int) -> float:
    field = compute_indicators(mesh, solution, scheme, dofmap, w, sources)
    return float(field.eta[t])


def dump_indicators(field: IndicatorField) -> str:
    lines = ["%d %.17g" % (t, v) for t, v in enumerate(field.eta)]
    return "\n".join(lines) + "\n"
