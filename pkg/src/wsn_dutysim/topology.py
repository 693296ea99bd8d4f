"""Random geometric layouts with a base station, comm edges, interference.

Node 0 is always the base station. Connectivity is a hard requirement:
generation redraws until the unit-disk comm graph is connected, then the
layout is frozen.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass


class UnconnectableError(RuntimeError):
    """Raised when no connected layout is found within the retry limit."""


@dataclass(frozen=True)
class Topology:
    positions: tuple[tuple[float, float], ...]
    comm_range: float
    interference_range: float
    width: float
    height: float
    seed: int

    @property
    def n(self) -> int:
        return len(self.positions)

    def distance(self, a: int, b: int) -> float:
        return math.dist(self.positions[a], self.positions[b])


def generate_topology(n: int, width: float, height: float, comm_range: float,
                      interference_factor: float, seed: int,
                      base_pos: tuple[float, float] | None = None,
                      retry_limit: int = 1000) -> Topology:
    """Draw a connected layout: base station fixed, the rest uniform.

    Node 0 sits at the field centre unless base_pos overrides it. The
    same arguments always yield bit-identical positions. Raises
    UnconnectableError after retry_limit unconnected redraws.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if comm_range <= 0:
        raise ValueError("comm_range must be > 0")
    if interference_factor < 1:
        raise ValueError("interference_factor must be >= 1")
    if base_pos is None:
        base_pos = (width / 2, height / 2)
    bx, by = base_pos
    if not (0 <= bx <= width and 0 <= by <= height):
        raise ValueError("base position outside the field")

    rng = random.Random(seed)
    for _ in range(retry_limit):
        positions = [(bx, by)]
        positions += [(rng.uniform(0, width), rng.uniform(0, height))
                      for _ in range(n - 1)]
        if _connected(positions, comm_range):
            return Topology(
                positions=tuple(positions),
                comm_range=comm_range,
                interference_range=interference_factor * comm_range,
                width=width, height=height, seed=seed)
    raise UnconnectableError(
        f"unconnectable: no connected layout for n={n} in "
        f"{width}x{height} m at comm_range={comm_range} m "
        f"after {retry_limit} redraws (seed {seed})")


def _connected(positions, comm_range: float) -> bool:
    n = len(positions)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        pu = positions[u]
        for v in range(n):
            if v not in seen and math.dist(pu, positions[v]) <= comm_range:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def neighbors(topo: Topology, v: int) -> set[int]:
    """All nodes within comm range of v, excluding v itself."""
    if not 0 <= v < topo.n:
        raise ValueError(f"invalid node id {v}")
    pv = topo.positions[v]
    return {u for u in range(topo.n)
            if u != v and math.dist(pv, topo.positions[u]) <= topo.comm_range}


def interferes_nodes(topo: Topology, a: int, b: int) -> bool:
    """True when simultaneous activity at a and b would collide."""
    if a == b:
        raise ValueError("self-interference is meaningless")
    if not (0 <= a < topo.n and 0 <= b < topo.n):
        raise ValueError("invalid node id")
    return topo.distance(a, b) <= topo.interference_range


def save_topology(topo: Topology, path) -> None:
    """Write positions as CSV (id,x,y); ranges/seed live in the config."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y"])
        for i, (x, y) in enumerate(topo.positions):
            writer.writerow([i, repr(x), repr(y)])


def load_topology(path, comm_range: float, interference_factor: float,
                  width: float, height: float, seed: int = 0) -> Topology:
    """Rebuild a Topology from a positions CSV plus the config-borne ranges."""
    rows = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows[int(rec["id"])] = (float(rec["x"]), float(rec["y"]))
    positions = tuple(rows[i] for i in range(len(rows)))
    return Topology(positions=positions, comm_range=comm_range,
                    interference_range=interference_factor * comm_range,
                    width=width, height=height, seed=seed)
