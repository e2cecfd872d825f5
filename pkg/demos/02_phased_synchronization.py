#!/usr/bin/env python3
"""The phased algorithm: merge clusters by recentring until one remains.

Every processor runs one basic policy per phase.  After each policy, a
synchronized cluster meets for a single radio-on tick 2n after the cluster
started, learns its membership, and reschedules itself into consecutive
k^2-blocks recentred 4n later.  Clusters that drift into each other merge;
after ceil(log2 n) phases everything is one cluster and a final policy
execution relays one clock to everyone.
"""

from radiosync import SimConfig, analysis, ceil_log2, energy, run
from radiosync.engine import SimTrace


def phase_clusters(trace, phase):
    view = SimTrace(cfg={}, n=trace.n, m=trace.m, k=trace.k,
                    horizon=trace.horizon, wakes=[])
    view.policies = [r for r in trace.policies
                     if r.kind == "basic" and r.phase == phase]
    return analysis.clusters(view)


def main():
    n, m = 1024, 16
    cfg = SimConfig(n=n, m=m, wake_times="adversarial-clustered",
                    algorithm="synchronize")
    trace = run(cfg)
    k, L = trace.k, ceil_log2(n)
    print(f"n={n}, m={m}: schedule parameter k={k}, {L} reschedule phases")
    print(f"wakes: half at 0, half at {n} (the adversarial split)\n")

    for phase in range(1, L + 2):
        cl = phase_clusters(trace, phase)
        desc = ", ".join(
            f"[{c.interval[0]},{c.interval[1]}]x{len(c.members)}" for c in cl)
        print(f"  phase {phase:2d}: {len(cl):2d} cluster(s)  {desc}")
        if len(cl) == 1 and len(cl[0].members) == m:
            print("           ^ all processors in one cluster")
            break

    rep = energy(trace)
    budget = (2 * k + 1) * (L + 1)
    print(f"\nclocks identical from tick {rep.sync_complete_tick}"
          f" (guarantee: {L * 4 * n + 2 * n + k * k + k})")
    print(f"max radio-on ticks per processor: {rep.max_energy}"
          f" (budget {budget} = (2k+1)(log n + 1))")
    print(f"naive baseline would spend {n + 1} per processor")


if __name__ == "__main__":
    main()
