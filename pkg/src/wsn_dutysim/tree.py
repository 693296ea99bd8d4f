"""Rooted spanning trees over a topology: BFS, SPT, MST.

All three root at the base station (node 0). BFS and SPT both minimize
hop count and differ only in which minimum-hop parent they keep: BFS
keeps the first discoverer (ascending-id discovery order), SPT the
shortest edge. MST minimizes total euclidean edge length (Prim).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .topology import Topology, neighbors

KINDS = ("bfs", "spt", "mst")


@dataclass(frozen=True)
class Tree:
    kind: str
    parent: dict[int, int]
    root: int = 0
    # derived, cached at construction
    _children: dict[int, list[int]] = field(repr=False, compare=False,
                                            default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.parent) + 1

    def children(self, v: int) -> list[int]:
        return self._children.get(v, [])


def _finish(kind: str, parent: dict[int, int]) -> Tree:
    kids: dict[int, list[int]] = {}
    for c in sorted(parent):
        kids.setdefault(parent[c], []).append(c)
    return Tree(kind=kind, parent=parent, _children=kids)


def build_tree(topo: Topology, kind: str) -> Tree:
    """Spanning tree of the comm graph rooted at node 0."""
    if kind not in KINDS:
        raise ValueError(f"unknown tree kind {kind!r}; expected one of {KINDS}")
    adj = [sorted(neighbors(topo, v)) for v in range(topo.n)]
    if kind == "mst":
        parent = _prim(topo, adj)
    else:
        parent = _hop_tree(topo, adj, shortest_edge=(kind == "spt"))
    if len(parent) != topo.n - 1:
        raise ValueError("disconnected topology: no spanning tree exists")
    return _finish(kind, parent)


def _hop_tree(topo: Topology, adj, shortest_edge: bool) -> dict[int, int]:
    # Single BFS fixes the layers; the parent rule is the only difference
    # between the two hop-minimal kinds.
    depth = {0: 0}
    frontier = [0]
    parent: dict[int, int] = {}
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in depth:
                    depth[v] = depth[u] + 1
                    parent[v] = u
                    nxt.append(v)
        frontier = nxt
    if shortest_edge:
        for v in parent:
            best = min((u for u in adj[v] if depth.get(u) == depth[v] - 1),
                       key=lambda u: (topo.distance(v, u), u))
            parent[v] = best
    return parent


def _prim(topo: Topology, adj) -> dict[int, int]:
    # O(n^2) Prim; candidate ties break on (distance, node id) so the
    # grown tree is unique for the given topology.
    n = topo.n
    in_tree = [False] * n
    in_tree[0] = True
    best_d = [math.inf] * n
    best_p = [-1] * n
    for v in adj[0]:
        best_d[v] = topo.distance(0, v)
        best_p[v] = 0
    parent: dict[int, int] = {}
    for _ in range(n - 1):
        v = min((u for u in range(n) if not in_tree[u]),
                key=lambda u: (best_d[u], u))
        if best_d[v] == math.inf:
            break
        in_tree[v] = True
        parent[v] = best_p[v]
        pv = topo.positions[v]
        for u in adj[v]:
            if not in_tree[u]:
                d = math.dist(pv, topo.positions[u])
                if d < best_d[u] or (d == best_d[u] and v < best_p[u]):
                    best_d[u] = d
                    best_p[u] = v
    return parent


def depths(tree: Tree) -> dict[int, int]:
    """Hop depth of every node; root is 0."""
    out = {tree.root: 0}
    stack = [tree.root]
    while stack:
        u = stack.pop()
        for c in tree.children(u):
            out[c] = out[u] + 1
            stack.append(c)
    return out


def total_edge_length(topo: Topology, tree: Tree) -> float:
    return sum(topo.distance(c, p) for c, p in tree.parent.items())


def save_tree(tree: Tree, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["child", "parent"])
        for c in sorted(tree.parent):
            writer.writerow([c, tree.parent[c]])
