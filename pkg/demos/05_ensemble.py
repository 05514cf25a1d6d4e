# %% [markdown]
# # A small ensemble and its report
#
# The harness repeats VQE with per-run seeds drawn from one master seed and
# writes JSON records plus CSV summaries. The acceptance suite uses 100 runs;
# a handful is enough to see the shape of the output.

# %%
import argparse
from pathlib import Path

from pha_vqe.harness import ExperimentSpec, report, run_experiment
from pha_vqe.hamiltonian import bundled_path

parser = argparse.ArgumentParser()
parser.add_argument("--runs", type=int, default=10)
parser.add_argument("--output", default="demo_results")
parser.add_argument("--noisy", action="store_true", help="add the noisy setting (about 1 s per run)")
args = parser.parse_args()

settings = ("ideal", "noisy") if args.noisy else ("ideal",)
spec = ExperimentSpec(
    str(bundled_path("h2_table1.json")),
    settings=settings,
    modes=("full", "partial", "pha-init"),
    runs=args.runs,
    output=args.output,
)
result = run_experiment(spec)

# %%
for (setting, mode), box in result.summary.items():
    print(f"{setting:>6} {mode:>8}  median {box.median:.5f}  IQR {box.iqr:.5f}  outliers {len(box.outliers)}")

# %%
paths = report(args.output)
print(Path(paths["table"]).read_text())
print(Path(paths["term_counts"]).read_text())
