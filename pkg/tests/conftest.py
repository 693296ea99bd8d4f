"""Shared test helpers: random instances and the schedule audit."""

import random

from wsn_dutysim import (build_tree, cluster_interferes, generate_topology,
                         schedule_tree)
from wsn_dutysim.radio import DEFAULT_PROFILE


def random_instance(rng, n_range=(8, 45), comm_range=(18, 40),
                    kind=None, max_tries=20):
    """One (topo, tree, schedule) at defaults, or None if the draw keeps
    coming up unconnectable."""
    for _ in range(max_tries):
        n = rng.randrange(*n_range)
        cr = rng.uniform(*comm_range)
        try:
            topo = generate_topology(n, 100, 100, cr, 2.0,
                                     rng.randrange(10 ** 6))
        except RuntimeError:
            continue
        k = kind or rng.choice(("bfs", "spt", "mst"))
        tree = build_tree(topo, k)
        return topo, tree, schedule_tree(topo, tree, DEFAULT_PROFILE)
    return None


def schedule_violations(topo, schedule):
    """Every schedule invariant in one sweep; returns violation strings.

    Checks: no slot holds interfering clusters; every cluster sits
    strictly after the clusters headed by its members; no cluster could
    move to an earlier slot (compactness); and among interfering,
    precedence-unrelated pairs the smaller weight_key takes the earlier
    slot unless the precedence floor, a blocking co-occupant, or
    readiness order forced the inversion.
    """
    out = []
    clusters = schedule.clusters
    assign = schedule.assignment
    by_id = {c.id: c for c in clusters}
    head_to_cid = {c.head: c.id for c in clusters}
    preds = {c.id: [head_to_cid[m] for m in c.members if m in head_to_cid]
             for c in clusters}

    def interferes(a, b):
        return cluster_interferes(topo, by_id[a], by_id[b])

    for s, cell in enumerate(schedule.frame):
        cell = sorted(cell)
        for i, a in enumerate(cell):
            for b in cell[i + 1:]:
                if interferes(a, b):
                    out.append(f"slot {s}: clusters {a} and {b} interfere")

    for cid, ps in preds.items():
        for p in ps:
            if assign[cid] <= assign[p]:
                out.append(f"precedence: {cid} at {assign[cid]} "
                           f"not after {p} at {assign[p]}")

    for cid in by_id:
        floor = max((assign[p] for p in preds[cid]), default=-1) + 1
        for s in range(floor, assign[cid]):
            if not any(interferes(cid, o) for o in schedule.frame[s]):
                out.append(f"compactness: {cid} at {assign[cid]} "
                           f"could sit in slot {s}")

    anc = {}

    def ancestors(cid):
        got = anc.get(cid)
        if got is None:
            got = set()
            for p in preds[cid]:
                got.add(p)
                got |= ancestors(p)
            anc[cid] = got
        return got

    pos = {cid: i for i, cid in enumerate(schedule.placement)}
    ids = sorted(by_id)
    for a in ids:
        for b in ids:
            if a == b or not interferes(a, b):
                continue
            if b in ancestors(a) or a in ancestors(b):
                continue
            ka = (by_id[a].weight_key, a)
            kb = (by_id[b].weight_key, b)
            if ka < kb and assign[a] > assign[b]:
                floor_a = max((assign[p] for p in preds[a]), default=-1) + 1
                if assign[b] < floor_a:
                    continue  # forced: precedence floor
                if any(o != b and interferes(a, o)
                       for o in schedule.frame[assign[b]]):
                    continue  # forced: slot already blocked for a
                ready_a = max((pos[p] for p in preds[a]), default=-1)
                if ready_a >= pos[b]:
                    continue  # forced: a not yet ready when b placed
                out.append(f"weight: {a} (key {ka}) after {b} (key {kb}) "
                           f"with nothing forcing it")
    return out


def make_rng(tag):
    return random.Random(f"wsn-dutysim:{tag}")
