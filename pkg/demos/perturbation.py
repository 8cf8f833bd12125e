"""Small pulse on the moving equilibrium: moving scheme vs the still scheme.

Writes CSV snapshots to ``out/``.  The still scheme cannot hold the moving
background and is expected to break down; its outcome is printed only.
"""
from twolayer_pcdg.errors import DomainError, SolverError
from twolayer_pcdg.harness import RunConfig, run_case

res = run_case(RunConfig("moving_perturbation", nx=200, ref="none", out="out"))
print(f"moving scheme: {len(res.reports)} steps, files: {', '.join(res.files)}")
try:
    res = run_case(RunConfig("moving_perturbation_still_scheme", nx=200, ref="none", out="out"))
    print(f"still scheme reached t={res.solution.t}")
except (DomainError, SolverError) as exc:
    print(f"still scheme failed: {exc}")
