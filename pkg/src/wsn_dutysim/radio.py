"""Radio energy model: states, power profile, switching economics.

Everything here is a pure function of a RadioProfile. The model has three
layers:

* per-state power draw (listen / receive / sleep, plus per-packet transmit
  and receive energies with a distance-squared amplifier term),
* transition costs, charged as the trapezoid of the endpoint powers
  ``t_switch * (p_active + p_sleep) / 2``,
* the sleep decision: a gap is worth sleeping through when the switching
  waste is strictly smaller than the energy saved, which closes to the
  break-even gap
  ``gap* = [(t_sa + t_as)(p_a + p_s)/2 - t_as * p_s] / (p_a - p_s)``.

``p_active`` in the switching formulas is the listen power: a node that
wakes up listens before it does anything else.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class RadioState(enum.Enum):
    """Exclusive radio states; a node is in exactly one at any instant."""

    SLEEP = "sleep"
    TRANSMIT = "transmit"
    RECEIVE = "receive"
    LISTEN = "listen"


_ACTIVE = (RadioState.TRANSMIT, RadioState.RECEIVE, RadioState.LISTEN)

# Ledger charge categories. tx/rx are per-packet pipeline costs; listen
# covers all idle active time (including the unused tail of tx/rx slots).
CATEGORIES = ("tx", "rx", "listen", "sleep", "transition")


@dataclass(frozen=True)
class RadioProfile:
    """Power, timing and per-bit energy constants of one radio.

    Units are strict SI: watts, seconds, joules. Defaults are mote-class
    magnitudes (60 mW active, 0.1 mW sleep, 2 ms switch times, 250 kbit/s,
    1 KiB packets).
    """

    p_listen: float = 0.060
    p_receive: float = 0.060
    p_sleep: float = 0.0001
    e_elec: float = 50e-9
    e_amp: float = 100e-12
    t_sleep_to_active: float = 0.002
    t_active_to_sleep: float = 0.002
    bitrate: float = 250_000.0
    packet_bits: int = 1024

    def __post_init__(self) -> None:
        for name in ("p_listen", "p_receive", "e_elec", "e_amp",
                     "t_sleep_to_active", "t_active_to_sleep",
                     "bitrate", "packet_bits"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.p_sleep < 0:
            raise ValueError("p_sleep must be >= 0")
        if self.p_sleep >= self.p_listen:
            raise ValueError("p_sleep must be < p_listen")


DEFAULT_PROFILE = RadioProfile()


def packet_airtime(profile: RadioProfile) -> float:
    """Seconds to put one packet on the air."""
    return profile.packet_bits / profile.bitrate


def switch_round_trip(profile: RadioProfile) -> float:
    """Shortest gap that physically fits going to sleep and waking up."""
    return profile.t_active_to_sleep + profile.t_sleep_to_active


def transition_energy(profile: RadioProfile, frm: RadioState,
                      to: RadioState) -> float:
    """Energy charged for one state switch.

    Sleep->active and active->sleep cost the trapezoid of the endpoint
    powers over the respective switch time; switches among the three
    active states are free, as is staying put.
    """
    if frm == to:
        return 0.0
    trapezoid = (profile.p_listen + profile.p_sleep) / 2
    if frm == RadioState.SLEEP:
        return profile.t_sleep_to_active * trapezoid
    if to == RadioState.SLEEP:
        return profile.t_active_to_sleep * trapezoid
    return 0.0


def interval_energy(profile: RadioProfile, state: RadioState,
                    duration: float) -> float:
    """Energy of holding ``state`` for ``duration`` seconds.

    Transmit intervals are charged per packet elsewhere; here a Transmit
    state draws listen power, covering the idle remainder of a transmit
    slot.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if state is RadioState.SLEEP:
        return profile.p_sleep * duration
    if state is RadioState.RECEIVE:
        return profile.p_receive * duration
    return profile.p_listen * duration


def tx_packet_energy(profile: RadioProfile, bits: int, distance: float) -> float:
    """Energy to transmit ``bits`` over ``distance`` metres.

    Electronics term plus distance-squared amplifier term:
    e_elec*bits + e_amp*bits*d^2.
    """
    if bits <= 0:
        raise ValueError("bits must be > 0")
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return profile.e_elec * bits + profile.e_amp * bits * distance * distance


def rx_packet_energy(profile: RadioProfile, bits: int) -> float:
    """Energy to receive ``bits``; distance-independent electronics cost."""
    if bits <= 0:
        raise ValueError("bits must be > 0")
    return profile.e_elec * bits


def switch_waste(profile: RadioProfile) -> float:
    """Energy wasted by the wake-up switch itself."""
    return profile.t_sleep_to_active * (profile.p_listen + profile.p_sleep) / 2


def _raw_sleep_saving(profile: RadioProfile, gap: float) -> float:
    # The saving formula with no domain guard; only the break-even solver
    # and its tests may evaluate it below the physical round trip.
    down = profile.t_active_to_sleep * (profile.p_listen + profile.p_sleep) / 2
    return (gap * profile.p_listen
            - (down + (gap - profile.t_active_to_sleep) * profile.p_sleep))


def sleep_saving(profile: RadioProfile, gap: float) -> float:
    """Energy saved by sleeping through an idle ``gap`` instead of listening.

    Raises if the gap cannot physically fit the sleep/wake round trip;
    callers must treat that case as "stay awake".
    """
    if gap < switch_round_trip(profile):
        raise ValueError(
            f"gap too short: {gap} s cannot fit the "
            f"{switch_round_trip(profile)} s switch round trip")
    return _raw_sleep_saving(profile, gap)


def should_sleep(profile: RadioProfile, gap: float) -> bool:
    """True when sleeping through ``gap`` strictly beats staying awake.

    Ties stay awake: equal waste and saving means switching churn for
    nothing.
    """
    if gap < 0:
        raise ValueError("gap must be >= 0")
    if gap < switch_round_trip(profile):
        return False
    return switch_waste(profile) < _raw_sleep_saving(profile, gap)


def break_even_gap(profile: RadioProfile) -> float:
    """The gap at which switching waste exactly equals sleep saving.

    Below the switch round trip the returned value is still the algebraic
    root; should_sleep then flips at the round trip instead, because
    shorter gaps cannot fit the switch at all.
    """
    if profile.p_listen <= profile.p_sleep:
        raise ValueError("no break-even: p_listen must exceed p_sleep")
    total_switch = profile.t_sleep_to_active + profile.t_active_to_sleep
    numer = (total_switch * (profile.p_listen + profile.p_sleep) / 2
             - profile.t_active_to_sleep * profile.p_sleep)
    return numer / (profile.p_listen - profile.p_sleep)


class EnergyLedger:
    """Per-node itemized energy account for one simulation run.

    Every charge is a (time, category, amount) row; remaining energy is
    initial minus the running sum, accumulated in append order.
    """

    def __init__(self, nodes, initial_energy: float):
        if initial_energy <= 0:
            raise ValueError("initial_energy must be > 0")
        self.initial_energy = initial_energy
        self._charges: dict[int, list[tuple[float, str, float]]] = {
            v: [] for v in nodes}
        self._consumed: dict[int, float] = {v: 0.0 for v in self._charges}

    @property
    def nodes(self):
        return self._charges.keys()

    def charge(self, node: int, time: float, category: str, amount: float) -> None:
        if amount < 0:
            raise ValueError("charge amount must be >= 0")
        if category not in CATEGORIES:
            raise ValueError(f"unknown charge category {category!r}")
        self._charges[node].append((time, category, amount))
        self._consumed[node] += amount

    def charge_many(self, node: int, rows) -> None:
        """Bulk append of (time, category, amount) rows for one node."""
        bucket = self._charges[node]
        total = 0.0
        for row in rows:
            if row[2] < 0:
                raise ValueError("charge amount must be >= 0")
            bucket.append(row)
            total += row[2]
        self._consumed[node] += total

    def charges(self, node: int) -> list[tuple[float, str, float]]:
        return list(self._charges[node])

    def consumed(self, node: int) -> float:
        return self._consumed[node]

    def remaining(self, node: int) -> float:
        return self.initial_energy - self._consumed[node]

    def category_total(self, node: int, category: str) -> float:
        return sum(a for _, c, a in self._charges[node] if c == category)
