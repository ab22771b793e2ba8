"""Numerical integration on triangles and edges.

Handles the singular distance weights |x - z|^(+-alpha) and the multi-source
piecewise weight by graded geometric subdivision toward the sources.
Triangle rule weights are normalized to sum to one, so an integral is
``area * sum(w_i * f(x_i))``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_TINY = 1e-300


class AccuracyWarning(UserWarning):
    """Requested quadrature tolerance was not certified within the budget."""


class SingularityError(Exception):
    """Evaluation of a singular weight exactly at a source point."""


@dataclass(frozen=True)
class WeightSpec:
    """Singular Muckenhoupt weight description.

    mode "single": w(x) = |x - z|^alpha for the one source z.
    mode "multi":  w(x) = |x - z|^alpha inside the ball of radius d_z / 2
    around the nearest source, and 1 elsewhere.
    """

    mode: str
    alpha: float
    sources: np.ndarray
    d_z: float | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "sources",
            np.atleast_2d(np.asarray(self.sources, dtype=float)),
        )
        if self.mode not in ("single", "multi"):
            raise ValueError("mode must be 'single' or 'multi'")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError("alpha must lie in (0, 2)")
        if self.mode == "single":
            if self.sources.shape[0] != 1:
                raise ValueError("single mode takes exactly one source")
        else:
            if self.d_z is None or self.d_z <= 0:
                raise ValueError("multi mode requires d_z > 0")

    @classmethod
    def single(cls, z, alpha):
        return cls("single", float(alpha), np.asarray(z, dtype=float))

    @classmethod
    def multi(cls, sources, alpha, d_z):
        return cls("multi", float(alpha), np.asarray(sources, dtype=float),
                   float(d_z))


def weight_eval(w: WeightSpec, x, exponent_sign: int = 1):
    """Evaluate the weight (or its reciprocal-exponent twin d^(-alpha) for
    exponent_sign=-1) at one point or an (n, 2) array of points."""
    x = np.asarray(x, dtype=float)
    single_point = x.ndim == 1
    pts = np.atleast_2d(x)
    expo = exponent_sign * w.alpha
    dist = np.min(
        np.hypot(pts[:, None, 0] - w.sources[None, :, 0],
                 pts[:, None, 1] - w.sources[None, :, 1]),
        axis=1,
    )
    if expo < 0 and np.any(dist == 0.0):
        raise SingularityError("weight evaluated at a source point")
    if w.mode == "single":
        val = dist ** expo
    else:
        val = np.where(dist < 0.5 * w.d_z, dist ** expo, 1.0)
    return float(val[0]) if single_point else val


# ---------------------------------------------------------------------------
# quadrature rules

@dataclass(frozen=True)
class QuadratureRule:
    """Points in barycentric coordinates; weights sum to one."""

    points: np.ndarray
    weights: np.ndarray
    degree: int


def _sym3(u):
    # one coordinate u, the other two equal
    b = 0.5 * (1.0 - u)
    return [(u, b, b), (b, u, b), (b, b, u)]


def _sym6(a, b):
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _make_rule(groups, degree):
    pts, wts = [], []
    for bary, w in groups:
        pts.extend(bary)
        wts.extend([w] * len(bary))
    return QuadratureRule(np.array(pts), np.array(wts), degree)


TRIANGLE_RULES = {
    1: _make_rule([([(1 / 3, 1 / 3, 1 / 3)], 1.0)], 1),
    2: _make_rule([(_sym3(2 / 3), 1 / 3)], 2),
    3: _make_rule(
        [([(1 / 3, 1 / 3, 1 / 3)], -27 / 48), (_sym3(0.6), 25 / 48)], 3
    ),
    4: _make_rule(
        [
            (_sym3(0.108103018168070), 0.223381589678011),
            (_sym3(0.816847572980459), 0.109951743655322),
        ],
        4,
    ),
    5: _make_rule(
        [
            ([(1 / 3, 1 / 3, 1 / 3)], 9 / 40),
            (_sym3(0.059715871789770), 0.132394152788506),
            (_sym3(0.797426985353087), 0.125939180544827),
        ],
        5,
    ),
    6: _make_rule(
        [
            (_sym3(0.501426509658179), 0.116786275726379),
            (_sym3(0.873821971016996), 0.050844906370207),
            (
                _sym6(0.310352451033785, 0.636502499121399),
                0.082851075618374,
            ),
        ],
        6,
    ),
}


def triangle_rule(degree: int) -> QuadratureRule:
    for d in sorted(TRIANGLE_RULES):
        if d >= degree:
            return TRIANGLE_RULES[d]
    return duffy_rule(degree // 2 + 1)


@lru_cache(maxsize=None)
def duffy_rule(n: int) -> QuadratureRule:
    """Collapsed tensor Gauss rule; exact for polynomials up to roughly
    degree 2n - 2, robust for smooth non-polynomial integrands."""
    x, wx = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    wx = 0.5 * wx
    u, t = np.meshgrid(x, x, indexing="ij")
    wu, wt = np.meshgrid(wx, wx, indexing="ij")
    lam = np.stack(
        [1.0 - u.ravel(), (u * (1.0 - t)).ravel(), (u * t).ravel()], axis=1
    )
    w = (2.0 * wu * wt * u).ravel()
    return QuadratureRule(lam, w, 2 * n - 2)


@lru_cache(maxsize=None)
def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def tri_integrate(tri, fn, rule: QuadratureRule) -> float:
    """area * sum(w * fn(points)) on one physical triangle."""
    tri = np.asarray(tri, dtype=float)
    pts = rule.points @ tri
    area = 0.5 * abs(
        (tri[1, 0] - tri[0, 0]) * (tri[2, 1] - tri[0, 1])
        - (tri[1, 1] - tri[0, 1]) * (tri[2, 0] - tri[0, 0])
    )
    return float(area * np.dot(rule.weights, fn(pts)))


def edge_rule(n: int = 4):
    return _gauss01(n)


def edge_integral(mesh, s: int, g, n: int = 4) -> float:
    """Gauss-Legendre integral of g over edge s of the mesh."""
    a, b = mesh.vertices[mesh.edges[s]]
    return segment_integral(a, b, g, n)


def segment_integral(a, b, g, n: int = 4) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t, w = _gauss01(n)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    return float(np.hypot(*(b - a)) * np.dot(w, g(pts)))


# ---------------------------------------------------------------------------
# weighted (possibly singular) cell integrals

def _tri_h(tri):
    return max(
        np.hypot(*(tri[1] - tri[0])),
        np.hypot(*(tri[2] - tri[1])),
        np.hypot(*(tri[0] - tri[2])),
    )


def _point_tri_dist(p, tri):
    v0 = tri[0]
    d1 = tri[1] - v0
    d2 = tri[2] - v0
    det = d1[0] * d2[1] - d1[1] * d2[0]
    r = p - v0
    l1 = (r[0] * d2[1] - r[1] * d2[0]) / det
    l2 = (d1[0] * r[1] - d1[1] * r[0]) / det
    if l1 >= 0 and l2 >= 0 and l1 + l2 <= 1:
        return 0.0
    best = np.inf
    for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
        ab = b - a
        t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        best = min(best, float(np.hypot(*(p - (a + t * ab)))))
    return best


def _cone_integral(z, a, b, wf, tol, max_levels=40):
    """Integral of a point-singular integrand over the triangle (z, a, b)
    via geometric shells graded toward z with ratio 1/2."""
    # shells are self-similar, so the per-shell rule error does not decay
    # with the level; a 10-point collapsed rule keeps it below 1e-12
    rule = duffy_rule(10)
    acc = 0.0
    prev = None
    sa, sb = np.asarray(a, float), np.asarray(b, float)
    z = np.asarray(z, float)
    for _ in range(max_levels):
        na = z + 0.5 * (sa - z)
        nb = z + 0.5 * (sb - z)
        c = tri_integrate([na, sa, sb], wf, rule) + tri_integrate(
            [na, sb, nb], wf, rule
        )
        acc += c
        if prev is not None:
            if c == 0.0 and prev == 0.0:
                return acc
            q = abs(c) / max(abs(prev), _TINY)
            if q < 1.0:
                tail = c * q / (1.0 - q)
                if abs(tail) <= tol * max(abs(acc), _TINY):
                    return acc + tail
        prev = c
        sa, sb = na, nb
    warnings.warn(
        "graded subdivision budget exhausted", AccuracyWarning, stacklevel=2
    )
    return acc


def _fan_integral(z, tri, wf, tol):
    """Split a triangle containing z into cones with apex z and integrate
    each by graded shells."""
    v0 = tri[0]
    d1 = tri[1] - v0
    d2 = tri[2] - v0
    det = d1[0] * d2[1] - d1[1] * d2[0]
    r = z - v0
    l1 = (r[0] * d2[1] - r[1] * d2[0]) / det
    l2 = (d1[0] * r[1] - d1[1] * r[0]) / det
    lam = np.array([1.0 - l1 - l2, l1, l2])
    eps = 1e-10
    small = lam < eps
    if small.sum() >= 2:  # z sits at a vertex
        k = int(np.argmax(lam))
        return _cone_integral(tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3],
                              wf, tol)
    if small.sum() == 1:  # z sits on an edge
        j = int(np.argmin(lam))
        a, b = tri[(j + 1) % 3], tri[(j + 2) % 3]
        c = tri[j]
        return (_cone_integral(z, b, c, wf, tol)
                + _cone_integral(z, c, a, wf, tol))
    return sum(
        _cone_integral(z, tri[j], tri[(j + 1) % 3], wf, tol)
        for j in range(3)
    )


def _split4(tri):
    m01 = 0.5 * (tri[0] + tri[1])
    m12 = 0.5 * (tri[1] + tri[2])
    m20 = 0.5 * (tri[2] + tri[0])
    return (
        np.array([tri[0], m01, m20]),
        np.array([m01, tri[1], m12]),
        np.array([m20, m12, tri[2]]),
        np.array([m01, m12, m20]),
    )


def _crosses_ball(tri, w: WeightSpec):
    if w.mode != "multi":
        return False
    radius = 0.5 * w.d_z
    for z in w.sources:
        dmin = _point_tri_dist(z, tri)
        dmax = max(np.hypot(*(v - z)) for v in tri)
        if dmin < radius < dmax:
            return True
    return False


def weighted_tri_integral(tri, w: WeightSpec, f, tol: float = 1e-8,
                          exponent_sign: int = 1) -> float:
    """Integral over one triangle of weight * f; f maps (n, 2) points to
    (n,) values.  Sources within one diameter of the triangle trigger the
    graded singular path."""
    tri = np.asarray(tri, dtype=float)

    def wf(pts):
        return weight_eval(w, pts, exponent_sign) * np.asarray(f(pts))

    return _weighted_rec(tri, w, wf, tol, 0)


def _weighted_rec(tri, w, wf, tol, depth):
    h = _tri_h(tri)
    near = [z for z in w.sources if _point_tri_dist(z, tri) <= h]
    if not near:
        if _crosses_ball(tri, w) and depth < 8:
            # the multi-source weight jumps across the ball boundary;
            # two uniform splits keep the committed error small
            return sum(
                sum(
                    tri_integrate(gc, wf, duffy_rule(6))
                    for gc in _split4(child)
                )
                for child in _split4(tri)
            )
        return tri_integrate(tri, wf, duffy_rule(6))
    if len(near) == 1 and _point_tri_dist(near[0], tri) == 0.0:
        return _fan_integral(np.asarray(near[0], float), tri, wf, tol)
    if depth >= 12:
        if any(_point_tri_dist(z, tri) == 0.0 for z in near):
            warnings.warn(
                "subdivision budget exhausted near a source",
                AccuracyWarning, stacklevel=2,
            )
        return tri_integrate(tri, wf, duffy_rule(6))
    return sum(_weighted_rec(c, w, wf, tol, depth + 1) for c in _split4(tri))


def weighted_cell_integral(mesh, t: int, w: WeightSpec, f,
                           tol: float = 1e-8, exponent_sign: int = 1) -> float:
    """Integral of weight * f over element t of the mesh."""
    return weighted_tri_integral(
        mesh.element_coords(t), w, f, tol, exponent_sign
    )
