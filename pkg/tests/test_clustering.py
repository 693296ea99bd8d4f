"""Cluster formation, weight assignment, and the interference predicate."""

import pytest

from conftest import make_rng
from wsn_dutysim.clustering import (assign_weights, cluster_interferes,
                                    form_clusters, save_clusters)
from wsn_dutysim.topology import Topology, generate_topology
from wsn_dutysim.tree import KINDS, build_tree


def test_one_cluster_per_non_leaf():
    for seed in range(10):
        topo = generate_topology(25, 100, 100, 30, 2.0, seed)
        for kind in KINDS:
            tree = build_tree(topo, kind)
            clusters = form_clusters(tree)
            non_leaves = sorted(v for v in range(topo.n) if tree.children(v))
            assert [c.head for c in clusters] == non_leaves
            assert [c.id for c in clusters] == list(range(len(clusters)))
            for c in clusters:
                assert list(c.members) == tree.children(c.head)
                assert list(c.members) == sorted(c.members)


def test_every_non_root_node_is_a_member_exactly_once():
    topo = generate_topology(30, 100, 100, 28, 2.0, 3)
    for kind in KINDS:
        clusters = form_clusters(build_tree(topo, kind))
        members = sorted(m for c in clusters for m in c.members)
        assert members == list(range(1, topo.n))


def test_star_collapses_to_one_cluster():
    topo = generate_topology(6, 100, 100, 200, 2.0, 1)
    tree = build_tree(topo, "bfs")  # everyone hears the base directly
    clusters = form_clusters(tree)
    assert len(clusters) == 1
    assert clusters[0].head == 0
    assert clusters[0].members == (1, 2, 3, 4, 5)
    assert clusters[0].nodes() == (1, 2, 3, 4, 5, 0)


def test_assign_weights_takes_member_minimum():
    topo = generate_topology(20, 100, 100, 30, 2.0, 5)
    tree = build_tree(topo, "mst")
    clusters = form_clusters(tree)
    rng = make_rng("weights")
    times = {v: rng.random() for v in range(1, topo.n)}
    weighted = assign_weights(clusters, times)
    for before, after in zip(clusters, weighted):
        assert before.weight_key is None  # originals untouched
        assert after.weight_key == min(times[m] for m in after.members)
        assert (after.id, after.head, after.members) == \
            (before.id, before.head, before.members)


def test_assign_weights_missing_node_is_an_error():
    topo = generate_topology(10, 100, 100, 40, 2.0, 2)
    clusters = form_clusters(build_tree(topo, "bfs"))
    times = {v: 0.0 for v in range(1, topo.n)}
    gone = clusters[0].members[0]
    del times[gone]
    with pytest.raises(ValueError, match=f"node {gone}"):
        assign_weights(clusters, times)


def test_interference_by_distance():
    # three two-node clusters on a line; only far pairs are clean
    positions = ((0.0, 0.0), (5.0, 0.0),      # cluster a
                 (30.0, 0.0), (35.0, 0.0),    # cluster b
                 (80.0, 0.0), (85.0, 0.0))    # cluster c
    topo = Topology(positions=positions, comm_range=10.0,
                    interference_range=30.0, width=90, height=1, seed=0)
    from wsn_dutysim.clustering import Cluster
    a = Cluster(id=0, head=0, members=(1,))
    b = Cluster(id=1, head=2, members=(3,))
    c = Cluster(id=2, head=4, members=(5,))
    assert cluster_interferes(topo, a, b)       # gap 25 <= 30
    assert not cluster_interferes(topo, a, c)   # gap 75
    assert not cluster_interferes(topo, b, c)   # gap 45
    assert cluster_interferes(topo, b, a)       # symmetric


def test_shared_node_always_interferes():
    # chained clusters share the middle node even when ranges are tiny
    positions = ((0.0, 0.0), (5.0, 0.0), (10.0, 0.0))
    topo = Topology(positions=positions, comm_range=6.0,
                    interference_range=0.1, width=20, height=1, seed=0)
    from wsn_dutysim.clustering import Cluster
    upper = Cluster(id=0, head=0, members=(1,))
    lower = Cluster(id=1, head=1, members=(2,))
    assert cluster_interferes(topo, upper, lower)


def test_self_interference_rejected():
    topo = generate_topology(10, 100, 100, 40, 2.0, 2)
    clusters = form_clusters(build_tree(topo, "bfs"))
    with pytest.raises(ValueError, match="itself"):
        cluster_interferes(topo, clusters[0], clusters[0])


def test_interference_equals_pairwise_node_oracle():
    from wsn_dutysim.topology import interferes_nodes
    for seed in range(8):
        topo = generate_topology(25, 100, 100, 28, 2.0, seed)
        clusters = form_clusters(build_tree(topo, "spt"))
        for i, c1 in enumerate(clusters):
            for c2 in clusters[i + 1:]:
                n1, n2 = set(c1.nodes()), set(c2.nodes())
                expect = bool(n1 & n2) or any(
                    interferes_nodes(topo, u, v)
                    for u in n1 for v in n2 if u != v)
                assert cluster_interferes(topo, c1, c2) == expect


def test_save_clusters_one_row_per_member(tmp_path):
    topo = generate_topology(15, 100, 100, 35, 2.0, 6)
    tree = build_tree(topo, "mst")
    clusters = assign_weights(form_clusters(tree),
                              {v: 0.0 for v in range(1, topo.n)})
    path = tmp_path / "clusters.csv"
    save_clusters(clusters, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "cluster_id,head,member,weight_key"
    assert len(lines) == 1 + sum(len(c.members) for c in clusters)
