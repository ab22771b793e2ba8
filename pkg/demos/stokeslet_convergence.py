"""Quantitative convergence study against the closed-form Stokeslet.

With boundary data interpolated from the exact fundamental solution the
true error is computable, so this demo reports estimator, weighted error,
convergence orders and effectivity indices per adaptive iteration, for
both an inf-sup stable pair and a stabilized pair.
"""

from stokesafem import DomainSpec, RunConfig, SchemeSpec, run_afem
from stokesafem.driver import plot_convergence


def run(family, max_iters):
    config = RunConfig(
        domain=DomainSpec("square", 4),
        scheme=SchemeSpec(family),
        alpha=1.5,
        sources=(((0.5, 0.5), (1.0, 1.0)),),
        exact=True,
        max_iters=max_iters,
    )
    table = run_afem(config)
    print("\n%s" % family)
    print("iter   ndof   estimator     error     eoc_est  eoc_err   eff")
    for row in table.rows:
        print("%4d %6d   %9.4g  %9.4g   %7s  %7s  %5.2f" % (
            row.iteration, row.ndof, row.estimator, row.err_total,
            "" if row.eoc_est is None else "%.3f" % row.eoc_est,
            "" if row.eoc_err is None else "%.3f" % row.eoc_err,
            row.effectivity,
        ))
    return table


def main():
    table = run("taylor-hood", 22)
    plot_convergence(table, "stokeslet_taylor_hood.svg")
    run("stab-p1p0", 16)
    print("\nwrote stokeslet_taylor_hood.svg")


if __name__ == "__main__":
    main()
