"""Analytic compute/communication timing for distributed inference.

Models a stack of equal-width dense layers executed across P accelerator
nodes under strict ordering: a node starts layer l+1 only once every
cross-node input for it has arrived, so per-layer compute and communication
times add.  Cross-block weights carry a uniform survival fraction (1 - s);
diagonal blocks stay dense, which is why compute speedups saturate well below
1/(1-s).

Timing is intentionally coarse: peak rates from the platform table scaled by
an efficiency factor, latency plus payload/bandwidth links, no overlap, no
collective scheduling.  Orderings and asymptotics are meaningful; absolute
cycle counts are not the goal.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import InputError

TOPOLOGIES = ("full-bisection", "shared-medium")

# cross-block survival flavors evaluated throughout: dense plus RP-50..RP-99
STANDARD_FLAVORS = (0.0, 0.5, 0.75, 0.9, 0.99)


@dataclass(frozen=True)
class PlatformConfig:
    name: str
    node_compute: float  # peak ops/second
    compute_efficiency: float  # achieved fraction of peak on matvec work
    node_memory: float  # bytes
    link_bandwidth: float  # bytes/second per link
    link_latency: float  # seconds
    topology: str

    def __post_init__(self):
        if self.node_compute <= 0 or self.link_bandwidth <= 0 or self.node_memory <= 0:
            raise InputError("platform rates and memory must be positive")
        if not 0 < self.compute_efficiency <= 1:
            raise InputError(f"efficiency must be in (0, 1], got {self.compute_efficiency}")
        if self.link_latency < 0:
            raise InputError("latency must be non-negative")
        if self.topology not in TOPOLOGIES:
            raise InputError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")

    @property
    def effective_compute(self) -> float:
        return self.node_compute * self.compute_efficiency

    @classmethod
    def from_dict(cls, obj: dict) -> "PlatformConfig":
        try:
            return cls(
                name=obj["name"],
                node_compute=float(obj["node_compute_ops"]),
                compute_efficiency=float(obj.get("compute_efficiency", 0.3)),
                node_memory=float(obj["node_memory_bytes"]),
                link_bandwidth=float(obj["link_bandwidth_bytes"]),
                link_latency=float(obj["link_latency_s"]),
                topology=obj["topology"],
            )
        except KeyError as exc:
            raise InputError(f"platform config missing key: {exc}") from exc

    @classmethod
    def load(cls, source) -> "PlatformConfig":
        """Load from a JSON file path or a bundled name ('datacenter', 'edge')."""
        path = Path(str(source))
        if path.is_file():
            return cls.from_dict(json.loads(path.read_text()))
        try:
            text = (resources.files("repurpose") / "platforms" / f"{source}.json").read_text()
        except (FileNotFoundError, ModuleNotFoundError):
            raise InputError(f"unknown platform {source!r} and no such file") from None
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Workload:
    neurons: int  # N, per layer
    nodes: int  # P
    sparsity: float = 0.0  # cross-block removal fraction s
    layers: int = 5
    element_bytes: int = 4

    def __post_init__(self):
        if not 0 <= self.sparsity < 1:
            raise InputError(f"sparsity must be in [0, 1), got {self.sparsity}")
        if self.nodes < 1 or self.neurons < 1 or self.layers < 1:
            raise InputError("neurons, nodes and layers must be positive")


@dataclass
class SimReport:
    platform: str
    workload: Workload
    compute_times: list[float]  # per layer, seconds
    comm_times: list[float]
    compute_total: float = field(init=False)
    comm_total: float = field(init=False)
    total: float = field(init=False)
    speedup: dict = field(default_factory=dict)

    def __post_init__(self):
        self.compute_total = sum(self.compute_times)
        self.comm_total = sum(self.comm_times)
        self.total = self.compute_total + self.comm_total

    def to_dict(self) -> dict:
        return {
            "platform": self.platform,
            "neurons": self.workload.neurons,
            "nodes": self.workload.nodes,
            "sparsity": self.workload.sparsity,
            "layers": self.workload.layers,
            "compute_times": self.compute_times,
            "comm_times": self.comm_times,
            "compute_total": self.compute_total,
            "comm_total": self.comm_total,
            "total": self.total,
            "speedup": self.speedup,
        }

    def to_csv(self) -> str:
        buf = _io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["N", "P", "flavor", "layer", "compute_s", "comm_s", "total_s"])
        for l, (ct, mt) in enumerate(zip(self.compute_times, self.comm_times)):
            writer.writerow(
                [
                    self.workload.neurons,
                    self.workload.nodes,
                    self.workload.sparsity,
                    l,
                    repr(ct),
                    repr(mt),
                    repr(ct + mt),
                ]
            )
        return buf.getvalue()


def theoretical_comm_per_node(N: int, P: int, s: float, element_bytes: int = 4) -> float:
    """Bytes each node must send out per input sample.

    Every node owns N/P boundary values; a (1 - s) fraction of the cross
    dependencies survives pruning, and each surviving value goes to each of
    the P - 1 peers.  Single node: nothing leaves.
    """
    if P < 1:
        raise InputError("node count must be >= 1")
    if P == 1:
        return 0.0
    return (N / P) * (P - 1) * (1.0 - s) * element_bytes


def _per_node_ops(N: int, P: int, s: float) -> float:
    """Multiply-accumulate ops per node per layer (2 ops per scalar multiply)."""
    own = N / P
    cross_inputs = (1.0 - s) * (N - own)
    return own * (own + cross_inputs) * 2.0


def simulate(platform: PlatformConfig, workload: Workload) -> SimReport:
    """Per-layer strict-ordering timing plus speedups against the dense run."""
    N, P, s = workload.neurons, workload.nodes, workload.sparsity
    weight_bytes_per_node = workload.layers * N * (N / P) * workload.element_bytes
    if weight_bytes_per_node > platform.node_memory:
        raise InputError(
            f"per-node weights ({weight_bytes_per_node:.3g} B) exceed node memory "
            f"({platform.node_memory:.3g} B) at N={N}, P={P}"
        )

    def layer_times(sp: float):
        compute = _per_node_ops(N, P, sp) / platform.effective_compute
        if P == 1:
            comm = 0.0
        else:
            payload = theoretical_comm_per_node(N, P, sp, workload.element_bytes)
            bandwidth = platform.link_bandwidth
            if platform.topology == "shared-medium":
                # every sender shares the medium with the other P-1 nodes
                bandwidth = bandwidth / (P - 1)
            comm = platform.link_latency + payload / bandwidth
        return compute, comm

    compute, comm = layer_times(s)
    report = SimReport(
        platform=platform.name,
        workload=workload,
        compute_times=[compute] * workload.layers,
        comm_times=[comm] * workload.layers,
    )
    dense_compute, dense_comm = layer_times(0.0)
    report.speedup = {
        "compute": dense_compute / compute,
        "comm": dense_comm / comm if comm > 0 else 1.0,
        "total": (dense_compute + dense_comm) / (compute + comm),
    }
    return report


def speedup_report(platform: PlatformConfig, N: int, flavors=None, node_counts=None):
    """Average speedups over node counts, one row per sparsity flavor.

    Rows are dicts with flavor plus compute/comm/total speedups; dense (s=0)
    is the reference, so its row is exactly 1.0 everywhere.
    """
    flavors = list(STANDARD_FLAVORS if flavors is None else flavors)
    node_counts = list(range(2, 33) if node_counts is None else node_counts)
    rows = []
    for s in flavors:
        sums = {"compute": 0.0, "comm": 0.0, "total": 0.0}
        for P in node_counts:
            rep = simulate(platform, Workload(neurons=N, nodes=P, sparsity=s))
            for key in sums:
                sums[key] += rep.speedup[key]
        rows.append(
            {
                "flavor": s,
                "compute_speedup": sums["compute"] / len(node_counts),
                "comm_speedup": sums["comm"] / len(node_counts),
                "total_speedup": sums["total"] / len(node_counts),
            }
        )
    return rows


def speedup_report_csv(rows) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["flavor", "compute_speedup", "comm_speedup", "total_speedup"])
    for row in rows:
        writer.writerow(
            [row["flavor"], row["compute_speedup"], row["comm_speedup"], row["total_speedup"]]
        )
    return buf.getvalue()


def naive_average_accuracy(rho: float, P: int) -> float:
    """Accuracy of averaging P independently classified digits.

    With per-node digit accuracy rho, the network-wide rounded average is
    right when all nodes are right (rho^P) and lands correctly by luck about
    1/9 of the remaining time: (1 + 8 rho^P) / 9.
    """
    if not 0 <= rho <= 1:
        raise InputError(f"accuracy must be in [0, 1], got {rho}")
    if P < 1:
        raise InputError("node count must be >= 1")
    return (1.0 + 8.0 * rho**P) / 9.0
