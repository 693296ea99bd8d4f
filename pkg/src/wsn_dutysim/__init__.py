"""Discrete-event simulator for TDMA duty-cycled sensor networks.

Builds random connected field topologies, spans them with BFS, shortest
path, or minimum spanning trees, groups each parent with its children
into one-hop clusters, packs the clusters into interference-free TDMA
slots, and replays whole frames of sense/forward traffic against a
four-state radio model to compare energy and delivery latency across
tree kinds.
"""

from .clustering import (Cluster, assign_weights, cluster_interferes,
                         form_clusters, save_clusters)
from .cli import (ComparisonReport, ConfigError, ExperimentConfig,
                  parse_config, parse_config_text, run_cell, run_comparison,
                  serialize_config, validate_config)
from .radio import (CATEGORIES, DEFAULT_PROFILE, EnergyLedger, RadioProfile,
                    RadioState, break_even_gap, interval_energy,
                    packet_airtime, rx_packet_energy, should_sleep,
                    sleep_saving, switch_round_trip, switch_waste,
                    transition_energy, tx_packet_energy)
from .scheduler import (Schedule, allocate_slots, member_event_times_from,
                        min_slot_duration, node_timeline, save_schedule,
                        save_timelines, schedule_tree)
from .simkernel import (Metrics, SensingModel, SimEvent, Trace, audit_trace,
                        dump_trace, run_simulation)
from .topology import (Topology, UnconnectableError, generate_topology,
                       interferes_nodes, load_topology, neighbors,
                       save_topology)
from .tree import KINDS, Tree, build_tree, depths, save_tree, total_edge_length

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES", "Cluster", "ComparisonReport", "ConfigError",
    "DEFAULT_PROFILE", "EnergyLedger", "ExperimentConfig", "KINDS",
    "Metrics", "RadioProfile", "RadioState", "Schedule", "SensingModel",
    "SimEvent", "Topology", "Trace", "Tree", "UnconnectableError",
    "allocate_slots", "assign_weights", "audit_trace", "break_even_gap",
    "build_tree", "cluster_interferes", "depths", "dump_trace",
    "form_clusters", "generate_topology", "interferes_nodes",
    "interval_energy", "load_topology", "member_event_times_from",
    "min_slot_duration", "neighbors", "node_timeline", "packet_airtime",
    "parse_config", "parse_config_text", "run_cell", "run_comparison",
    "run_simulation", "rx_packet_energy", "save_clusters", "save_schedule",
    "save_timelines", "save_topology", "save_tree", "schedule_tree",
    "serialize_config", "should_sleep", "sleep_saving", "switch_round_trip",
    "switch_waste", "total_edge_length", "transition_energy",
    "tx_packet_energy", "validate_config", "__version__",
]
