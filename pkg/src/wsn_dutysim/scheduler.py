"""TDMA slot allocation for clusters and per-node radio timelines.

Slots go to clusters, greatest weight (smallest timestamp) first, under
two hard constraints: a cluster's slot must come after the slots of all
clusters headed by its members (the aggregate must exist before it can be
forwarded), and no slot may hold two interfering clusters. Non-interfering
clusters share slots — that spatial reuse is what keeps frames short.

Weight order and precedence can disagree: a cluster with a leaf member
carries timestamp 0 yet may depend on a deep subtree that finishes late.
The greedy therefore works from a ready list — among clusters whose
predecessors are all placed, the smallest (weight_key, id) goes next, into
the lowest feasible slot. Weight order is obeyed whenever it is feasible;
inversions happen only when precedence or interference forces them, and
the recorded placement order lets an audit verify exactly that.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .clustering import Cluster, assign_weights, cluster_interferes, form_clusters
from .radio import (RadioProfile, RadioState, packet_airtime, should_sleep,
                    switch_round_trip)
from .topology import Topology


@dataclass(frozen=True)
class Schedule:
    slot_duration: float
    frame: tuple[frozenset[int], ...]
    assignment: dict[int, int]
    frame_length: int
    clusters: tuple[Cluster, ...]
    placement: tuple[int, ...]  # greedy pick order, for audits

    def frame_duration(self) -> float:
        return self.frame_length * self.slot_duration

    def cluster_by_id(self, cid: int) -> Cluster:
        return self.clusters[cid]


def min_slot_duration(tree, profile: RadioProfile) -> float:
    """Shortest slot that fits the widest cluster's packet burst.

    max_children back-to-back packets plus the switch round trip as
    margin.
    """
    max_children = max(len(tree.children(v)) for v in range(tree.n))
    return max_children * packet_airtime(profile) + switch_round_trip(profile)


def _predecessors(clusters) -> dict[int, list[int]]:
    head_to_cid = {c.head: c.id for c in clusters}
    return {c.id: [head_to_cid[m] for m in c.members if m in head_to_cid]
            for c in clusters}


def _greedy(clusters, interference, preds, weight_of):
    """Ready-list first-fit. weight_of(cluster, placed) -> weight_key.

    Returns (assignment, placement order, weights). Weights are computed
    the first time a cluster becomes ready, at which point all its
    predecessors' slots are known.
    """
    by_id = {c.id: c for c in clusters}
    placed: dict[int, int] = {}
    slots: list[set[int]] = []
    weights: dict[int, float] = {}
    placement: list[int] = []
    pending = set(by_id)
    while pending:
        ready = [cid for cid in pending
                 if all(p in placed for p in preds[cid])]
        for cid in ready:
            if cid not in weights:
                weights[cid] = weight_of(by_id[cid], placed)
        pick = min(ready, key=lambda cid: (weights[cid], cid))
        floor = max((placed[p] for p in preds[pick]), default=-1) + 1
        s = floor
        while True:
            if s == len(slots):
                slots.append(set())
            if all(not interference(by_id[pick], by_id[o]) for o in slots[s]):
                break
            s += 1
        slots[s].add(pick)
        placed[pick] = s
        placement.append(pick)
        pending.discard(pick)
    return placed, placement, weights


def allocate_slots(clusters, interference, slot_duration: float) -> Schedule:
    """Schedule pre-weighted clusters under interference + precedence.

    interference is a symmetric predicate over Cluster pairs. Equal
    weight_keys break by ascending cluster id.
    """
    if slot_duration <= 0:
        raise ValueError("slot_duration must be > 0")
    for c in clusters:
        if c.weight_key is None:
            raise ValueError(f"cluster {c.id} has no weight_key")
    preds = _predecessors(clusters)
    assignment, placement, _ = _greedy(
        clusters, interference, preds,
        weight_of=lambda c, placed: c.weight_key)
    length = 1 + max(assignment.values(), default=-1)
    frame = tuple(frozenset(cid for cid, s in assignment.items() if s == i)
                  for i in range(length))
    ordered = tuple(sorted(clusters, key=lambda c: c.id))
    return Schedule(slot_duration=slot_duration, frame=frame,
                    assignment=assignment, frame_length=length,
                    clusters=ordered, placement=tuple(placement))


def _interference_memo(topo: Topology):
    cache: dict[tuple[int, int], bool] = {}

    def pred(c1: Cluster, c2: Cluster) -> bool:
        key = (c1.id, c2.id) if c1.id < c2.id else (c2.id, c1.id)
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = cluster_interferes(topo, c1, c2)
        return hit

    return pred


def schedule_tree(topo: Topology, tree, profile: RadioProfile,
                  slot_duration: float | None = None,
                  sensing_times: dict[int, float] | None = None,
                  reuse: bool = True) -> Schedule:
    """Cluster the tree, resolve weights, and allocate slots.

    Weights need member event times, and a non-leaf member's event time is
    the end of the slot where its own cluster completes — so weights and
    slots are resolved together: each cluster's weight_key is fixed the
    moment its predecessors are placed. slot_duration None means the
    tree's own minimum (auto sizing). reuse False degrades to one cluster
    per slot (every pair treated as interfering), for delay comparisons.
    """
    if slot_duration is None:
        slot_duration = min_slot_duration(tree, profile)
    elif slot_duration < min_slot_duration(tree, profile):
        raise ValueError(
            f"slot_duration {slot_duration} s is below the minimum "
            f"{min_slot_duration(tree, profile)} s for this tree "
            f"(max children x packet airtime + switch round trip)")
    clusters = form_clusters(tree)
    if reuse:
        interference = _interference_memo(topo)
    else:
        interference = lambda a, b: True
    preds = _predecessors(clusters)
    head_to_cid = {c.head: c.id for c in clusters}
    senses = sensing_times or {}

    def lazy_weight(c: Cluster, placed: dict[int, int]) -> float:
        times = []
        for m in c.members:
            cid = head_to_cid.get(m)
            if cid is None:
                times.append(senses.get(m, 0.0))
            else:
                times.append((placed[cid] + 1) * slot_duration)
        return min(times)

    assignment, _, weights = _greedy(clusters, interference, preds, lazy_weight)

    # Re-derive through the public two-step path; same greedy, same
    # weights, hence the identical placement.
    event_times = member_event_times_from(assignment, clusters, tree,
                                          slot_duration, senses)
    weighted = assign_weights(clusters, event_times)
    return allocate_slots(weighted, interference, slot_duration)


def member_event_times_from(assignment, clusters, tree, slot_duration,
                            sensing_times=None) -> dict[int, float]:
    """Event time per non-root node: sense time for leaves, own-cluster
    slot end for heads."""
    senses = sensing_times or {}
    head_to_cid = {c.head: c.id for c in clusters}
    out = {}
    for v in range(tree.n):
        if v == tree.root:
            continue
        cid = head_to_cid.get(v)
        if cid is None:
            out[v] = senses.get(v, 0.0)
        else:
            out[v] = (assignment[cid] + 1) * slot_duration
    return out


def node_timeline(schedule: Schedule, tree, node: int,
                  profile: RadioProfile, duty_cycle: bool = True):
    """One frame of (start, end, RadioState) intervals for one node.

    Transmit for the whole slot of the cluster the node belongs to,
    Receive for the whole slot it heads, and every maximal idle gap is
    Sleep iff should_sleep says the gap pays for the switch (always
    Listen when duty cycling is off). Intervals are contiguous and cover
    the frame exactly.
    """
    if not 0 <= node < tree.n:
        raise ValueError(f"unknown node {node}")
    activities = []
    for c in schedule.clusters:
        if node in c.members:
            activities.append((schedule.assignment[c.id], RadioState.TRANSMIT))
        if node == c.head:
            activities.append((schedule.assignment[c.id], RadioState.RECEIVE))
    activities.sort(key=lambda a: a[0])
    sd = schedule.slot_duration
    frame_end = schedule.frame_duration()
    out = []
    cursor = 0.0

    def fill_gap(until: float) -> None:
        nonlocal cursor
        if until > cursor:
            gap = until - cursor
            if duty_cycle and should_sleep(profile, gap):
                state = RadioState.SLEEP
            else:
                state = RadioState.LISTEN
            out.append((cursor, until, state))
            cursor = until

    for slot, state in activities:
        # boundaries as exact multiples of sd so intervals tile cleanly
        start = slot * sd
        end = (slot + 1) * sd
        fill_gap(start)
        out.append((start, end, state))
        cursor = end
    fill_gap(frame_end)
    return out


def save_schedule(schedule: Schedule, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "cluster_id"])
        for s, cell in enumerate(schedule.frame):
            for cid in sorted(cell):
                writer.writerow([s, cid])


def save_timelines(schedule: Schedule, tree, profile: RadioProfile, path,
                   duty_cycle: bool = True) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "start_s", "end_s", "state"])
        for v in range(tree.n):
            for start, end, state in node_timeline(schedule, tree, v,
                                                   profile, duty_cycle):
                writer.writerow([v, repr(start), repr(end), state.value])
