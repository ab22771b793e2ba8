"""Adaptive run on the L-shaped domain with the source near the reentrant
corner.

The L-shape is (-1,1)^2 minus the quadrant [0,1) x (-1,0].  With the point
force at z = (0.25, 0.25) the refinement concentrates both at the source
and toward the reentrant corner at the origin.
"""

from stokesafem import DomainSpec, RunConfig, SchemeSpec, run_afem


def main():
    config = RunConfig(
        domain=DomainSpec("l-shape", 2),
        scheme=SchemeSpec("mini"),
        alpha=1.0,
        sources=(((0.25, 0.25), (1.0, 0.0)),),
        max_iters=18,
        dump_mesh="l_shape_final_mesh.txt",
    )
    table = run_afem(config)

    print("iter   ndof   estimator")
    for row in table.rows:
        print("%4d %6d   %9.4g" % (row.iteration, row.ndof, row.estimator))
    print("\nfinal mesh: %d elements, wrote l_shape_final_mesh.txt"
          % table.final_mesh.num_elements)


if __name__ == "__main__":
    main()
