"""Deterministic discrete-event kernel.

Each frame: leaves sense at the frame start, slots fire in order, members
push their held packets to their cluster head (transmit charged over the
tree edge, receive charged at the head), heads aggregate and forward in
their own later slot, the base station's receptions count as deliveries
at the end of the receiving slot. Idle time follows the static per-node
timeline (sleep where the gap pays for the switch), transitions are
charged at every state boundary including the frame seam, and every joule
lands in the ledger. The run halts after the first frame in which a node's
energy runs out.

Events process in (time, kind-rank, node) order off a heap; kind ranks are
sense=0, slot-start=1, delivered=2, so sensing lands before slot 0 fires.
"""

from __future__ import annotations

import csv
import heapq
import math
import random
from dataclasses import dataclass, field

from .clustering import form_clusters
from .radio import (EnergyLedger, RadioProfile, RadioState, interval_energy,
                    packet_airtime, rx_packet_energy, transition_energy,
                    tx_packet_energy)
from .scheduler import Schedule, node_timeline
from .topology import Topology, interferes_nodes

_EVENT_RANK = {"sense": 0, "slot-start": 1, "delivered": 2}


@dataclass(frozen=True)
class SimEvent:
    time: float
    kind: str  # sense | slot-start | delivered
    node: int  # sensing leaf / -1 for slot starts / delivering sender
    detail: str = ""

    def sort_key(self):
        return (self.time, _EVENT_RANK[self.kind], self.node)


@dataclass(frozen=True)
class SensingModel:
    """every-frame: all leaves sense each frame. bernoulli: each non-root
    node draws once per frame in ascending id from a stream seeded by
    ``seed``; leaves sense when their draw < p. Drawing for non-leaves too
    keeps the stream identical across tree kinds on the same topology."""

    kind: str = "every-frame"
    p: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("every-frame", "bernoulli"):
            raise ValueError(f"unknown sensing model {self.kind!r}")
        if not 0 < self.p <= 1:
            raise ValueError("sensing p must be in (0, 1]")


@dataclass(frozen=True)
class Metrics:
    total_energy: float
    per_node_energy: tuple[float, ...]
    mean_delivery_latency: float
    packets_delivered: int
    first_death_time: float | None
    frames_run: int


@dataclass
class Trace:
    """Self-contained record of one run, sufficient for a full audit."""

    topo: Topology
    tree: object
    schedule: Schedule
    profile: RadioProfile
    ledger: EnergyLedger
    initial_energy: float
    duty_cycle: bool
    frames_run: int = 0
    frame_duration: float = 0.0
    # (start, end, state) per node, absolute times over all frames run
    intervals: dict[int, list] = field(default_factory=dict)
    # (t_start, t_end, sender, receiver)
    transmissions: list = field(default_factory=list)
    # (time, sender, packets, readings)
    deliveries: list = field(default_factory=list)
    events: list = field(default_factory=list)


def _static_rows(timeline, profile, duty_cycle):
    """Frame-relative (dt, category, amount) rows that never vary: gap
    intervals and state transitions. Returns (rows, first_state,
    last_state); the frame-seam transition is appended by the caller."""
    rows = []
    for start, end, state in timeline:
        if state is RadioState.SLEEP:
            rows.append((start, "sleep", interval_energy(profile, state,
                                                         end - start)))
        elif state is RadioState.LISTEN:
            rows.append((start, "listen", interval_energy(profile, state,
                                                          end - start)))
        # transmit/receive slots are charged by the packet flow
    for (s0, _, st0), (s1, _, st1) in zip(timeline, timeline[1:]):
        cost = transition_energy(profile, st0, st1)
        if cost:
            rows.append((s1, "transition", cost))
    return rows, timeline[0][2], timeline[-1][2]


def run_simulation(topo: Topology, tree, schedule: Schedule,
                   profile: RadioProfile, frames: int,
                   sensing: SensingModel = SensingModel(),
                   initial_energy: float = 2.0, duty_cycle: bool = True,
                   aggregation_ratio: float = 1.0,
                   collect_trace: bool = False):
    """Run ``frames`` frames; returns (Metrics, EnergyLedger, Trace|None).

    Identical arguments give bit-identical results. Raises on frames <= 0,
    aggregation_ratio outside (0, 1], or a schedule that was not built
    from this tree.
    """
    if frames <= 0:
        raise ValueError("frames must be > 0")
    if not 0 < aggregation_ratio <= 1:
        raise ValueError("aggregation_ratio must be in (0, 1]")
    if tree.n != topo.n:
        raise ValueError("tree and topology disagree on node count")
    expected = [(c.head, c.members) for c in form_clusters(tree)]
    actual = [(c.head, c.members) for c in schedule.clusters]
    if expected != actual:
        raise ValueError("schedule was not built from this tree")

    n = topo.n
    sd = schedule.slot_duration
    airtime = packet_airtime(profile)
    bits = profile.packet_bits
    frame_dur = schedule.frame_duration()
    ledger = EnergyLedger(range(n), initial_energy)
    leaves = frozenset(v for v in range(n) if v != 0 and not tree.children(v))

    timelines = {v: node_timeline(schedule, tree, v, profile, duty_cycle)
                 for v in range(n)}
    static0 = {}
    static_rest = {}
    for v in range(n):
        rows, first_state, last_state = _static_rows(timelines[v], profile,
                                                     duty_cycle)
        rows.sort(key=lambda r: r[0])
        static0[v] = rows
        seam = transition_energy(profile, last_state, first_state)
        if seam:
            static_rest[v] = [(0.0, "transition", seam)] + rows
        else:
            static_rest[v] = rows

    # cluster bookkeeping for the slot handler
    by_id = {c.id: c for c in schedule.clusters}
    edge_len = {v: topo.distance(v, tree.parent[v]) for v in tree.parent}

    trace = None
    if collect_trace:
        trace = Trace(topo=topo, tree=tree, schedule=schedule,
                      profile=profile, ledger=ledger,
                      initial_energy=initial_energy, duty_cycle=duty_cycle,
                      frame_duration=frame_dur,
                      intervals={v: [] for v in range(n)})

    rng = random.Random(sensing.seed)
    delivered_packets = 0
    delivered_readings = 0
    latency_sum = 0.0
    first_death: tuple[float, int] | None = None
    frames_run = 0

    for f in range(frames):
        t_frame = f * frame_dur
        if sensing.kind == "bernoulli":
            draws = [rng.random() for _ in range(n - 1)]
            sensed = [v for v in range(1, n)
                      if v in leaves and draws[v - 1] < sensing.p]
        else:
            sensed = sorted(leaves)

        frame_rows: dict[int, list] = {v: [] for v in range(n)}
        held_packets: dict[int, int] = {}
        held_readings: dict[int, int] = {}

        heap = []
        for v in sensed:
            heapq.heappush(heap, (t_frame, 0, v, -1))
        for s in range(schedule.frame_length):
            heapq.heappush(heap, (t_frame + s * sd, 1, -1, s))

        while heap:
            t, rank, node, slot = heapq.heappop(heap)
            if rank == 0:
                held_packets[node] = 1
                held_readings[node] = 1
                if trace is not None:
                    trace.events.append(SimEvent(t, "sense", node))
            elif rank == 1:
                if trace is not None:
                    trace.events.append(SimEvent(
                        t, "slot-start", -1, detail=f"slot {slot}"))
                for cid in sorted(schedule.frame[slot]):
                    c = by_id[cid]
                    head = c.head
                    offset = 0.0
                    rx_packets = 0
                    rx_readings = 0
                    for m in c.members:
                        cnt = held_packets.pop(m, 0)
                        rds = held_readings.pop(m, 0)
                        if cnt:
                            burst_end = offset + cnt * airtime
                            if burst_end > sd + 1e-12:
                                raise RuntimeError(
                                    f"slot overflow: node {m} needs "
                                    f"{burst_end} s of airtime in a "
                                    f"{sd} s slot")
                            e_tx = tx_packet_energy(profile, bits, edge_len[m])
                            e_rx = rx_packet_energy(profile, bits)
                            rows_m = frame_rows[m]
                            rows_h = frame_rows[head]
                            for k in range(cnt):
                                t0 = t + offset + k * airtime
                                rows_m.append((t0, "tx", e_tx))
                                rows_h.append((t0, "rx", e_rx))
                                if trace is not None:
                                    trace.transmissions.append(
                                        (t0, t0 + airtime, m, head))
                            offset = burst_end
                            rx_packets += cnt
                            rx_readings += rds
                            if head == 0:
                                delivered_packets += cnt
                                delivered_readings += rds
                                latency_sum += rds * ((slot + 1) * sd)
                                heapq.heappush(heap, (t + sd, 2, m, -1))
                                if trace is not None:
                                    trace.deliveries.append(
                                        (t + sd, m, cnt, rds))
                        # idle remainder of this member's transmit slot
                        frame_rows[m].append((
                            t, "listen",
                            interval_energy(profile, RadioState.TRANSMIT,
                                            sd - cnt * airtime)))
                    frame_rows[head].append((
                        t, "listen",
                        interval_energy(profile, RadioState.RECEIVE,
                                        sd - rx_packets * airtime)))
                    if rx_packets and head != 0:
                        held_packets[head] = max(
                            1, math.ceil((1 - aggregation_ratio) * rx_packets))
                        held_readings[head] = rx_readings
            else:
                if trace is not None:
                    trace.events.append(SimEvent(t, "delivered", node))

        static = static0 if f == 0 else static_rest
        for v in range(n):
            rows = [(t_frame + dt, cat, amt) for dt, cat, amt in static[v]]
            rows += frame_rows[v]
            rows.sort(key=lambda r: r[0])
            ledger.charge_many(v, rows)
            if trace is not None:
                trace.intervals[v].extend(
                    (t_frame + s, t_frame + e, st)
                    for s, e, st in timelines[v])

        frames_run = f + 1
        dead = [v for v in range(n) if ledger.remaining(v) <= 0]
        if dead:
            for v in dead:
                charges = ledger.charges(v)
                # grouped accumulation can round differently than this
                # sequential scan; fall back to the last charge time
                cand = (charges[-1][0], v)
                cum = 0.0
                for t, _, amt in charges:
                    cum += amt
                    if cum >= initial_energy:
                        cand = (t, v)
                        break
                if first_death is None or cand < first_death:
                    first_death = cand
            break

    per_node = tuple(ledger.consumed(v) for v in range(n))
    metrics = Metrics(
        total_energy=sum(per_node),
        per_node_energy=per_node,
        mean_delivery_latency=(latency_sum / delivered_readings
                               if delivered_readings else 0.0),
        packets_delivered=delivered_packets,
        first_death_time=first_death[0] if first_death else None,
        frames_run=frames_run)
    if trace is not None:
        trace.frames_run = frames_run
    return metrics, ledger, trace


def audit_trace(trace: Trace) -> list[str]:
    """Mechanized invariant check over a completed run's trace.

    Empty result means: every node's intervals tile its frames exactly
    (state exclusivity), no two interference-range nodes transmit at
    once, the ledger conserves energy, and every hop followed a tree
    parent edge. Violations are returned as strings, not raised.
    """
    out = []
    tol = 1e-9
    span = trace.frames_run * trace.frame_duration

    for v, ivs in trace.intervals.items():
        cursor = 0.0
        for start, end, _ in ivs:
            if start > cursor + tol:
                out.append(f"exclusivity: node {v} uncovered "
                           f"[{cursor}, {start})")
            elif start < cursor - tol:
                out.append(f"exclusivity: node {v} overlap at {start}")
            cursor = end
        if abs(cursor - span) > tol:
            out.append(f"exclusivity: node {v} coverage ends at {cursor}, "
                       f"frame span is {span}")

    txs = sorted(trace.transmissions)
    active: list[tuple[float, int]] = []  # (end, sender)
    for t0, t1, sender, _ in txs:
        active = [(e, s) for e, s in active if e > t0 + tol]
        for _, other in active:
            if other != sender and interferes_nodes(trace.topo, sender, other):
                out.append(f"collision: nodes {other} and {sender} "
                           f"transmit concurrently at {t0}")
        active.append((t1, sender))

    for v in trace.ledger.nodes:
        charges = trace.ledger.charges(v)
        total = sum(a for _, _, a in charges)
        drift = abs((trace.initial_energy - total)
                    - trace.ledger.remaining(v))
        if drift > tol * max(1.0, trace.initial_energy):
            out.append(f"conservation: node {v} ledger drift {drift}")
        if any(a < 0 for _, _, a in charges):
            out.append(f"conservation: node {v} has a negative charge")

    parent = trace.tree.parent
    for t0, _, sender, receiver in txs:
        if parent.get(sender) != receiver:
            out.append(f"path: transmission {sender}->{receiver} at {t0} "
                       f"is not a tree edge")
    return out


def dump_trace(trace: Trace, path) -> None:
    """Event log as CSV: time_s,node,event,detail."""
    rows = [(ev.time, _EVENT_RANK[ev.kind], ev.node, ev.kind, ev.detail)
            for ev in trace.events]
    rows += [(t0, 3, s, "tx", f"to {r} until {t1}")
             for t0, t1, s, r in trace.transmissions]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "node", "event", "detail"])
        for t, _, node, kind, detail in rows:
            writer.writerow([repr(t), node, kind, detail])
