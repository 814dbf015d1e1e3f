"""Analytic timing on the two reference platforms.

Sweeps the cross-block sparsity flavors (dense, RP-50 .. RP-99) over node
counts and prints the per-node communication payload, per-flavor speedups,
and how the bottleneck differs between a datacenter (fat links, fast nodes)
and an edge deployment (shared slow medium).
"""

from repurpose import PlatformConfig, Workload, simulate, speedup_report, theoretical_comm_per_node
from repurpose.simulator import STANDARD_FLAVORS

datacenter = PlatformConfig.load("datacenter")
edge = PlatformConfig.load("edge")

N = 8192
print(f"per-node payload at N={N} (bytes/sample, dense):")
for P in (2, 4, 8, 16, 32):
    print(f"  P={P:>2}: {theoretical_comm_per_node(N, P, 0.0):8.0f}")
ratio = theoretical_comm_per_node(N, 32, 0.0) / theoretical_comm_per_node(N, 2, 0.0)
print(f"  D(32)/D(2) = {ratio}  (approaches 2 as P grows)")

for platform in (datacenter, edge):
    print(f"\n{platform.name}: speedups vs dense, averaged over P = 2..32, N = {N}")
    print(f"  {'flavor':>8} {'compute':>9} {'comm':>9} {'total':>9}")
    for row in speedup_report(platform, N):
        label = "dense" if row["flavor"] == 0 else f"RP-{int(row['flavor'] * 100)}"
        print(
            f"  {label:>8} {row['compute_speedup']:>9.2f} {row['comm_speedup']:>9.2f} "
            f"{row['total_speedup']:>9.2f}"
        )

print("\nwhere the time goes at P=8, RP-90:")
for platform in (datacenter, edge):
    rep = simulate(platform, Workload(neurons=N, nodes=8, sparsity=0.9))
    share = rep.comm_total / rep.total
    print(
        f"  {platform.name:>10}: total {rep.total * 1e6:9.2f} us/sample, "
        f"communication share {share:6.1%}"
    )

print("\nlarger models shift the balance toward compute (datacenter, RP-90, P in 24..32):")
for n in (1024, 8192, 65536):
    row = speedup_report(datacenter, n, flavors=[0.9], node_counts=[24, 28, 32])[0]
    print(f"  N={n:>6}: total speedup {row['total_speedup']:.2f}x")
