"""
A desk-scale Monte Carlo study
==============================

The simulation harness draws clustered binormal (or log-binormal) data,
runs the full estimate / covariance / test pipeline each replicate, and
aggregates bias, RMSE, confidence-interval coverage and rejection rate.
Replicate RNG streams are derived from (seed, replicate), so reports are
reproducible and independent of worker scheduling.
"""

from dataclasses import replace

from wroc.simulation import run_study, table3_scenario

# 200 replicates keeps this demo around ten seconds; published-scale runs
# use n_reps=1000.
scenario = replace(table3_scenario(rho=0.2, n=50), n_reps=200)
print(f"scenario: {scenario.name}, {scenario.n_reps} replicates, "
      f"seed {scenario.seed}")
print(f"true difference (auc): "
      f"{run_study(replace(scenario, n_reps=1)).cells[0].truth:+.4f}\n")

report = run_study(scenario)
print(f"{'measure':14s} {'weights':8s} {'bias':>9s} {'rmse':>8s} "
      f"{'coverage':>9s} {'power':>7s}")
for cell in report.cells:
    print(f"{cell.measure:14s} {cell.weight_method:8s} {cell.bias:+9.5f} "
          f"{cell.rmse:8.5f} {100 * cell.coverage:8.1f}% {cell.power:7.3f}")

print(f"\nelapsed {report.elapsed_seconds:.1f}s; optimal weighting buys "
      f"power, paid for at this sample size with some anti-conservative "
      f"coverage (the weights are estimated from the same data)")

# Rerunning gives bit-identical estimates.
again = run_study(scenario)
same = all((a.estimates == b.estimates).all()
           for a, b in zip(report.cells, again.cells))
print(f"rerun bit-identical: {same}")
