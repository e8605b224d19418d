"""End-to-end scaling study: zero counts and doubling exponents vs lambda.

Runs the full pipeline on a modest disk configuration, fits log-log slopes,
and writes the CSV/JSON/SVG artifacts that the `steklab scaling` subcommand
would produce. Everything is seeded and byte-deterministic.
"""

import os
import tempfile

from steklab import lab

config = lab.ExperimentConfig(
    domain="disk",
    n_nodes=256,
    j_max=12,
    n_centers=6,
    octaves=2.5,
)
print("config:", config.to_json())

study = lab.run_scaling_study(config)

print(f"\nnodal fit:    slope {study.nodal_fit.slope:.4f}, "
      f"intercept {study.nodal_fit.intercept:.4f} "
      f"(disk truth: slope 1, intercept log 2)")
print(f"doubling fit: slope {study.doubling_fit.slope:.4f}")

excluded = [r for r in study.records if not r.included]
print(f"{len(study.records)} pairs, {len(excluded)} excluded")

outdir = os.path.join(tempfile.gettempdir(), "steklab_demo_study")
paths = lab.write_artifacts(study, outdir)
print("\nartifacts:")
for name, path in sorted(paths.items()):
    print(f"  {name}: {path} ({os.path.getsize(path)} bytes)")

# the frequency suite doubles as a self-test of the analysis machinery
report = lab.run_frequency_suite(n_cases=8)
print("\nfrequency suite:")
for line in report.summary_lines():
    print(" ", line)
