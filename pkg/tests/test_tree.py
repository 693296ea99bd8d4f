"""Spanning trees: hop-minimality, parent tie rules, MST against
independent oracles."""

import itertools

import pytest

from conftest import make_rng
from wsn_dutysim.topology import Topology, generate_topology, neighbors
from wsn_dutysim.tree import (KINDS, build_tree, depths, save_tree,
                              total_edge_length)


def graph_edges(topo):
    return [(a, b) for a in range(topo.n) for b in range(a + 1, topo.n)
            if topo.distance(a, b) <= topo.comm_range]


def hop_distances(topo):
    """Plain BFS distances from node 0, independent of tree.py."""
    dist = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for u in neighbors(topo, v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def kruskal_edge_set(topo):
    """Union-find MST oracle; returns the edge set as frozensets."""
    parent = list(range(topo.n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    chosen = set()
    edges = sorted(graph_edges(topo),
                   key=lambda e: (topo.distance(*e), e))
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            chosen.add(frozenset((a, b)))
    return chosen


def tree_edge_set(tree):
    return {frozenset((c, p)) for c, p in tree.parent.items()}


def line_topology(spacing, count, comm):
    positions = tuple((i * spacing, 0.0) for i in range(count))
    return Topology(positions=positions, comm_range=comm,
                    interference_range=2 * comm, width=spacing * count,
                    height=1.0, seed=0)


def test_unknown_kind_rejected():
    topo = generate_topology(5, 100, 100, 80, 2.0, 1)
    with pytest.raises(ValueError, match="unknown tree kind"):
        build_tree(topo, "steiner")


def test_disconnected_topology_rejected():
    topo = Topology(positions=((0.0, 0.0), (99.0, 99.0)), comm_range=5.0,
                    interference_range=10.0, width=100, height=100, seed=0)
    for kind in KINDS:
        with pytest.raises(ValueError, match="disconnected"):
            build_tree(topo, kind)


def test_all_kinds_span_and_root_at_zero():
    for seed in range(15):
        topo = generate_topology(30, 100, 100, 28, 2.0, seed)
        for kind in KINDS:
            tree = build_tree(topo, kind)
            assert tree.root == 0
            assert 0 not in tree.parent
            assert sorted(tree.parent) == list(range(1, topo.n))
            # walking up from any node must reach the root
            for v in range(1, topo.n):
                hops = 0
                while v != 0:
                    v = tree.parent[v]
                    hops += 1
                    assert hops <= topo.n


def test_parent_edges_exist_in_comm_graph():
    for seed in range(10):
        topo = generate_topology(25, 100, 100, 30, 2.0, seed)
        for kind in KINDS:
            tree = build_tree(topo, kind)
            for c, p in tree.parent.items():
                assert topo.distance(c, p) <= topo.comm_range


def test_bfs_and_spt_are_hop_minimal():
    for seed in range(15):
        topo = generate_topology(30, 100, 100, 26, 2.0, seed)
        oracle = hop_distances(topo)
        for kind in ("bfs", "spt"):
            d = depths(build_tree(topo, kind))
            assert d == oracle


def test_spt_picks_shortest_edge_to_the_upper_layer():
    for seed in range(15):
        topo = generate_topology(30, 100, 100, 26, 2.0, seed)
        layer = hop_distances(topo)
        tree = build_tree(topo, "spt")
        for v, p in tree.parent.items():
            candidates = [u for u in neighbors(topo, v)
                          if layer[u] == layer[v] - 1]
            best = min(candidates, key=lambda u: (topo.distance(v, u), u))
            assert p == best


def test_bfs_parent_is_a_minimum_hop_neighbor():
    for seed in range(10):
        topo = generate_topology(25, 100, 100, 28, 2.0, seed)
        layer = hop_distances(topo)
        tree = build_tree(topo, "bfs")
        for v, p in tree.parent.items():
            assert layer[p] == layer[v] - 1


def test_mst_matches_kruskal():
    for seed in range(50):
        topo = generate_topology(24, 100, 100, 32, 2.0, seed)
        tree = build_tree(topo, "mst")
        assert tree_edge_set(tree) == kruskal_edge_set(topo)


def test_mst_matches_exhaustive_enumeration_small():
    """Brute force over all n-1 edge subsets for tiny fields."""
    rng = make_rng("mst-exhaustive-small")
    done = 0
    while done < 20:
        n = rng.randrange(4, 8)
        try:
            topo = generate_topology(n, 100, 100, rng.uniform(45, 75), 2.0,
                                     rng.randrange(10 ** 6), retry_limit=50)
        except RuntimeError:
            continue
        done += 1
        tree = build_tree(topo, "mst")
        best = None
        best_set = None
        for subset in itertools.combinations(graph_edges(topo), n - 1):
            parent = list(range(n))

            def find(v):
                while parent[v] != v:
                    parent[v] = parent[parent[v]]
                    v = parent[v]
                return v

            ok = True
            for a, b in subset:
                ra, rb = find(a), find(b)
                if ra == rb:
                    ok = False
                    break
                parent[ra] = rb
            if not ok:
                continue
            weight = sum(topo.distance(a, b) for a, b in subset)
            if best is None or weight < best:
                best = weight
                best_set = {frozenset(e) for e in subset}
        assert tree_edge_set(tree) == best_set


def test_mst_on_a_line_chains_the_nodes():
    topo = line_topology(spacing=10.0, count=5, comm=25.0)
    tree = build_tree(topo, "mst")
    assert tree.parent == {1: 0, 2: 1, 3: 2, 4: 3}
    # hop trees take the long comm-range shortcuts instead
    bfs = build_tree(topo, "bfs")
    assert bfs.parent == {1: 0, 2: 0, 3: 1, 4: 2}


def test_children_are_ascending_and_consistent():
    for seed in range(10):
        topo = generate_topology(20, 100, 100, 30, 2.0, seed)
        for kind in KINDS:
            tree = build_tree(topo, kind)
            for v in range(topo.n):
                kids = tree.children(v)
                assert kids == sorted(kids)
                for c in kids:
                    assert tree.parent[c] == v
            listed = [c for v in range(topo.n) for c in tree.children(v)]
            assert sorted(listed) == list(range(1, topo.n))


def test_total_edge_length_sums_parent_edges():
    topo = generate_topology(15, 100, 100, 35, 2.0, 4)
    tree = build_tree(topo, "mst")
    hand = sum(topo.distance(c, p) for c, p in sorted(tree.parent.items()))
    assert total_edge_length(topo, tree) == pytest.approx(hand, rel=1e-12)


def test_mst_never_longer_than_hop_trees():
    for seed in range(20):
        topo = generate_topology(30, 100, 100, 28, 2.0, seed)
        lengths = {k: total_edge_length(topo, build_tree(topo, k))
                   for k in KINDS}
        assert lengths["mst"] <= lengths["bfs"] + 1e-9
        assert lengths["mst"] <= lengths["spt"] + 1e-9


def test_build_is_deterministic():
    topo = generate_topology(30, 100, 100, 28, 2.0, 17)
    for kind in KINDS:
        assert build_tree(topo, kind).parent == build_tree(topo, kind).parent


def test_save_tree_lists_every_edge(tmp_path):
    topo = generate_topology(10, 100, 100, 40, 2.0, 2)
    tree = build_tree(topo, "bfs")
    path = tmp_path / "tree.csv"
    save_tree(tree, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "child,parent"
    assert len(lines) == topo.n  # header + n-1 edges
