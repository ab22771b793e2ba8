"""Adaptive refinement loop, marking, convergence accounting and output.

One iteration runs assemble -> solve -> estimate -> (optional) exact error
-> record -> mark -> bisect.  Marking uses the maximum rule: an element is
refined when its indicator exceeds theta times the largest indicator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import assembly, elements as el, estimator, exact, solver
from .mesh import DomainSpec, Mesh, bisect, build_initial_mesh
from .quadrature import WeightSpec


class DriverError(Exception):
    """Adaptive loop failure; message carries the iteration index."""


@dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    scheme: el.SchemeSpec
    alpha: float
    sources: tuple
    theta: float = 0.5
    max_iters: int = 25
    ndof_cap: int = 200_000
    exact: bool = False
    out_csv: str | None = None
    dump_mesh: str | None = None
    dump_indicators: str | None = None
    tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError("alpha must lie in (0, 2)")
        if not self.sources:
            raise ValueError("at least one source is required")
        if self.exact and len(self.sources) != 1:
            raise ValueError("exact errors need a single source")
        srcs = tuple(
            (np.asarray(z, dtype=float), np.asarray(f, dtype=float))
            for z, f in self.sources
        )
        object.__setattr__(self, "sources", srcs)


@dataclass
class TableRow:
    iteration: int
    ndof: int
    estimator: float
    err_u: float | None = None
    err_p: float | None = None
    err_total: float | None = None
    eoc_est: float | None = None
    eoc_err: float | None = None

    @property
    def effectivity(self) -> float | None:
        if self.err_total is None or self.err_total == 0.0:
            return None
        return self.estimator / self.err_total


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)
    final_mesh: Mesh = None
    final_solution: solver.Solution = None
    final_indicators: estimator.IndicatorField = None

    def append(self, row: TableRow):
        if self.rows and row.ndof <= self.rows[-1].ndof:
            raise DriverError("Ndof must increase across iterations")
        self.rows.append(row)

    def column(self, name):
        return [getattr(r, name) for r in self.rows]


def mark(field_: estimator.IndicatorField, theta: float) -> np.ndarray:
    """Maximum marking: { T : eta_T > theta * max eta }.  Strict, so an
    all-zero field marks nothing."""
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    return np.nonzero(field_.eta > theta * field_.eta.max())[0]


def _rate(q_new, q_old, n_new, n_old):
    if q_new is None or q_old is None or q_new <= 0.0 or q_old <= 0.0:
        return None
    return -math.log(q_new / q_old) / math.log(n_new / n_old)


def compute_rates(table: ConvergenceTable):
    """Fill consecutive-row convergence orders with respect to Ndof."""
    rows = table.rows
    for prev, cur in zip(rows, rows[1:]):
        cur.eoc_est = _rate(cur.estimator, prev.estimator,
                            cur.ndof, prev.ndof)
        cur.eoc_err = _rate(cur.err_total, prev.err_total,
                            cur.ndof, prev.ndof)


def make_weight(config: RunConfig) -> WeightSpec:
    points = [z for z, _ in config.sources]
    if len(points) == 1:
        return WeightSpec.single(points[0], config.alpha)
    d_bdry = min(config.domain.boundary_distance(z) for z in points)
    d_pair = min(
        float(np.hypot(*(points[i] - points[j])))
        for i in range(len(points)) for j in range(i + 1, len(points))
    )
    return WeightSpec.multi(points, config.alpha, min(d_bdry, d_pair))


def run_afem(config: RunConfig) -> ConvergenceTable:
    mesh = build_initial_mesh(config.domain)
    w = make_weight(config)
    spec = None
    if config.exact:
        z, f = config.sources[0]
        spec = exact.StokesletSpec(z, f)

    table = ConvergenceTable()
    for it in range(config.max_iters):
        dofmap = el.build_dof_map(config.scheme, mesh)
        system = assembly.assemble(mesh, config.scheme, dofmap)
        system.load = assembly.delta_load(
            mesh, config.scheme, dofmap, config.sources
        )
        if spec is not None:
            g = exact.boundary_interpolant([spec], dofmap)
        else:
            g = np.zeros(dofmap.n_velocity)
        constrained = assembly.apply_dirichlet(system, dofmap, g)
        try:
            sol = solver.solve_saddle(constrained)
        except solver.SolverError as exc:
            if config.dump_mesh:
                with open(config.dump_mesh, "w") as fh:
                    fh.write(mesh.dump())
            raise DriverError(
                "solve failed at iteration %d: %s" % (it, exc)
            ) from exc

        field_ = estimator.compute_indicators(
            mesh, sol, config.scheme, dofmap, w, config.sources, config.tol
        )
        row = TableRow(it, dofmap.ndof, field_.global_value)
        if spec is not None:
            err = exact.weighted_error(
                mesh, sol, spec, w, config.scheme, dofmap, config.tol
            )
            row.err_u = err["err_u"]
            row.err_p = err["err_p"]
            row.err_total = err["total"]
        table.append(row)
        table.final_mesh = mesh
        table.final_solution = sol
        table.final_indicators = field_

        if dofmap.ndof >= config.ndof_cap:
            break
        marked = mark(field_, config.theta)
        if marked.size == 0:
            break
        mesh = bisect(mesh, sorted(int(t) for t in marked))

    compute_rates(table)
    if config.out_csv:
        write_csv(table, config.out_csv)
    if config.dump_mesh:
        with open(config.dump_mesh, "w") as fh:
            fh.write(table.final_mesh.dump())
    if config.dump_indicators:
        with open(config.dump_indicators, "w") as fh:
            fh.write(estimator.dump_indicators(table.final_indicators))
    return table


def _fmt(v):
    return "" if v is None else "%.10g" % v


def write_csv(table: ConvergenceTable, path: str):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["iter", "ndof", "estimator", "err_u", "err_p",
                      "err_total", "eoc_est", "eoc_err", "effectivity"])
        for r in table.rows:
            out.writerow([
                r.iteration, r.ndof, "%.10g" % r.estimator,
                _fmt(r.err_u), _fmt(r.err_p), _fmt(r.err_total),
                _fmt(r.eoc_est), _fmt(r.eoc_err), _fmt(r.effectivity),
            ])


def plot_convergence(table: ConvergenceTable, path: str):
    """Log-log plot of estimator (and error, if present) against Ndof with
    Ndof^-1 and Ndof^-1/2 reference slopes."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = np.array(table.column("ndof"), dtype=float)
    eta = np.array(table.column("estimator"))
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(n, eta, "o-", label="estimator")
    errs = table.column("err_total")
    if errs[0] is not None:
        ax.loglog(n, np.array(errs, dtype=float), "s-", label="error")
    for slope, style in ((-1.0, "k--"), (-0.5, "k:")):
        ref = eta[0] * (n / n[0]) ** slope
        ax.loglog(n, ref, style, label="slope %g" % slope)
    ax.set_xlabel("Ndof")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
