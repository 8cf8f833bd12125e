"""Run the still- and moving-water equilibrium presets and print their errors."""
import warnings

from twolayer_pcdg.harness import RunConfig, run_case

warnings.simplefilter("ignore")

for case, t_end in (("still_wb_1d", 0.1), ("still_wb_1d_dis", 0.1), ("moving_wb_1d", 0.05)):
    for k in (1, 2):
        res = run_case(RunConfig(case, k=k, t_end=t_end, ref="initial"), write=False)
        worst = max(max(res.errors.l1.values()), max(res.errors.linf.values()))
        print(f"{case:<16} k={k}  steps={len(res.reports):4d}  max error {worst:.2e}")
