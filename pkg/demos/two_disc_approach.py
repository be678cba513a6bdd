"""Two unit discs pulled together by their own flow.

Prints the boundary distance next to the Gronwall floor built from twice the
fitted constant. Takes under a minute.
"""

from alphapatch.curves import PatchSystem, disc
from alphapatch.diagnostics import fitted_constant, gronwall_floor, splash_criterion_report
from alphapatch.evolution import EvolutionConfig, run

N = 64
GAP = 0.3

system = PatchSystem((disc((-1 - GAP / 2, 0), 1.0, N, label=0),
                      disc((1 + GAP / 2, 0), 1.0, N, label=1)), alpha=0.25)
result = run(system, EvolutionConfig(dt_max=0.01, t_end=2.0, stop_distance=0.05), 2)

records = result.records
c_used = 2 * fitted_constant(records)
print(f"stopped by {result.reason} at t={records[-1].time:.4f}")
print(f"{'t':>8} {'d':>10} {'floor':>10} {'ratio':>10}")
for rec, floor in zip(records, gronwall_floor(records, c_used)):
    print(f"{rec.time:8.4f} {rec.d:10.5f} {floor:10.5f} {rec.velocity_diff_ratio:10.5f}")
print(splash_criterion_report(records)["verdict"])
