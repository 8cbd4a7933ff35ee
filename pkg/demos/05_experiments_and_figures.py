"""End-to-end experiment runs producing the CSV artifacts for the figures.

Writes desk-profile convergence traces and rate CDF samples into
demos_out/, the same artifacts the command line produces:

    cfmimo converge --out demos_out
    cfmimo cdf --drops 6 --out demos_out

The TypeScript renderer in frontend/ turns these CSVs into SVG figures:

    node frontend/dist/cli.js convergence --in demos_out/convergence_maxmin.csv --out fig2b.svg
    node frontend/dist/cli.js cdf --in demos_out/cdf_rates.csv --bound uatf --out fig3a.svg
"""

import numpy as np

from cfmimo.experiments import ExperimentConfig, run_cdf, run_convergence
from cfmimo.network import NetworkConfig

OUT = "demos_out"

network = NetworkConfig.desk()
for kind in ("converge-maxmin", "converge-qos"):
    cfg = ExperimentConfig(network=network, kind=kind, n_drops=1, master_seed=0, out_dir=OUT)
    print("wrote", run_convergence(cfg))

cfg = ExperimentConfig(network=network, kind="cdf", n_drops=6, master_seed=0, out_dir=OUT)
path = run_cdf(cfg)
print("wrote", path)

rates = {}
with open(path) as f:
    for line in f:
        if line.startswith("#") or line.startswith("drop"):
            continue
        _, _, _, scenario, bound, rate = line.strip().split(",")
        rates.setdefault((scenario, bound), []).append(float(rate))

print("\nmedian per-user rates over the drops (b/s/Hz):")
for scenario in ("small-cells", "distributed", "centralized"):
    uatf = np.median(rates[(scenario, "uatf")])
    coh = np.median(rates[(scenario, "coherent")])
    print(f"  {scenario:12s} uatf {uatf:5.2f}   coherent {coh:5.2f}   gap {coh - uatf:4.2f}")
