"""Self-convergence of both schemes on the smooth periodic case.

The 3200-cell reference takes a while; pass a smaller one as the first
argument (e.g. ``python convergence.py 800``) for a quick look.
"""
import sys

from twolayer_pcdg.harness import (RunConfig, convergence_table, error_norms, reference_solution,
                                   run_case)

nref = int(sys.argv[1]) if len(sys.argv) > 1 else 3200
meshes = [n for n in (50, 100, 200, 400) if n < nref]
ref = reference_solution(RunConfig("accuracy").resolved(), f"self:{nref}")
for scheme in ("still", "moving"):
    for k in (1, 2):
        reports = [error_norms(run_case(RunConfig("accuracy", nx=n, k=k, scheme=scheme,
                                                  ref="none"), write=False).solution, ref)
                   for n in meshes]
        print(f"{scheme} scheme, k={k}")
        print(convergence_table(reports)[0])
