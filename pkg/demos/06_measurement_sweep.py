"""A small tail-probability sweep and the matched-measurement ratio.

Runs the batch orchestrator over a grid of (edge count, RIP constant,
stop time, deployment), writes the records and per-cell geometric
means, then extracts the minimum measurement counts at a matched tail
level for the network-coded ensemble and the i.i.d. Gaussian baseline.
All randomness derives from the master seed: re-running reproduces the
files byte for byte, and interrupted sweeps resume from partial output.
"""

import math
import tempfile
from pathlib import Path

from qncsim import (SweepConfig, measurement_ratio, minimum_measurements_gaussian,
                    rip_report, run_sweep, summarize_records)
from qncsim.harness import _evaluator

workdir = Path(tempfile.mkdtemp())
cfg = SweepConfig(
    node_count=8,
    edge_counts=(24, 48),
    deltas=(0.41421,),
    stop_times=(3, 5, 9),
    deployments=4,
    search_budget=24,
    seed=11,
    output=str(workdir / "records.csv"),
)

print("=== running the sweep grid ===")
records = run_sweep(cfg)
print(f"{len(records)} records -> {cfg.output}")
for summary in summarize_records(records):
    print(f"  |E|={summary.edge_count} stop={summary.stop_time}: "
          f"mean m={summary.mean_m:.1f}, "
          f"geomean p_qnc={summary.geomean_p_qnc:.4f}, "
          f"geomean p_gauss={summary.geomean_p_gauss:.4f}")

print("\n=== matched-tail measurement comparison ===")
target = 0.35
eps = 0.41421 / math.sqrt(2)
print(f"target tail level {target} at eps={eps:.5f}")
print(f"Gaussian minimum m: {minimum_measurements_gaussian(eps, target)}")
for edge_count in cfg.edge_counts:
    evaluators = [_evaluator(cfg, edge_count, dep) for dep in range(cfg.deployments)]
    cell = measurement_ratio(cfg, edge_count, 0.41421, target=target,
                             m_cap_factor=30.0, evaluators=evaluators)
    print(f"  |E|={edge_count}: m_qnc={cell.m_qnc:.1f}, "
          f"log10 ratio={cell.log10_ratio:.3f}, "
          f"rank-limited floor={cell.rank_limited_floor:.4f}")
print("(denser networks mix better: the ratio improves with more edges;")
print(" tight targets below the rank-limited floor are unreachable at")
print(" small edge counts no matter how many measurements are taken)")

print("\n=== RIP bounds over the records ===")
rows = rip_report(records, cfg.node_count, k_values=(1, 2))
vacuous = sum(r.vacuous for r in rows)
print(f"{len(rows)} bounds, {vacuous} vacuous at this scale")

print("\n=== resumability ===")
full = Path(cfg.output).read_bytes()
partial = b"\n".join(full.split(b"\n")[:3]) + b"\n"
Path(cfg.output).write_bytes(partial)
run_sweep(cfg)
print("resumed file identical to the original:",
      Path(cfg.output).read_bytes() == full)
