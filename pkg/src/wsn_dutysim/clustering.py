"""Parent-headed clusters over a tree, weights, pairwise interference.

One cluster per non-leaf node: the node is the head, its children are the
members. Member sets partition all non-root nodes; a head reappears as a
member one level up, which is what chains the clusters into a convergecast
pipeline. Weight is the earliest pending event time among members —
smaller timestamp means greater scheduling weight.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

from .topology import Topology, interferes_nodes


@dataclass(frozen=True)
class Cluster:
    id: int
    head: int
    members: tuple[int, ...]
    weight_key: float | None = None

    def nodes(self) -> tuple[int, ...]:
        return self.members + (self.head,)


def form_clusters(tree) -> list[Cluster]:
    """One cluster per non-leaf tree node, ids ascending by head id."""
    clusters = []
    heads = sorted(v for v in range(tree.n) if tree.children(v))
    for cid, h in enumerate(heads):
        clusters.append(Cluster(id=cid, head=h,
                                members=tuple(tree.children(h))))
    return clusters


def assign_weights(clusters, event_times: dict[int, float]) -> list[Cluster]:
    """Attach weight_key = min of members' event times."""
    out = []
    for c in clusters:
        try:
            key = min(event_times[m] for m in c.members)
        except KeyError as exc:
            raise ValueError(
                f"missing event time for node {exc.args[0]} "
                f"(member of cluster {c.id})") from None
        out.append(replace(c, weight_key=key))
    return out


def cluster_interferes(topo: Topology, c1: Cluster, c2: Cluster) -> bool:
    """True when any node of one cluster interferes with any of the other.

    Heads count: a head receives while members transmit, and shared nodes
    (chained clusters) interfere trivially.
    """
    if c1.id == c2.id:
        raise ValueError("cluster does not interfere with itself")
    n1, n2 = c1.nodes(), c2.nodes()
    for u in n1:
        for v in n2:
            if u == v or interferes_nodes(topo, u, v):
                return True
    return False


def save_clusters(clusters, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cluster_id", "head", "member", "weight_key"])
        for c in clusters:
            w = "" if c.weight_key is None else repr(c.weight_key)
            for m in c.members:
                writer.writerow([c.id, c.head, m, w])
