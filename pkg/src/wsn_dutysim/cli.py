"""Experiment front end: flat-text configs, seeded sweeps, CSV reports.

A config is plain ``key = value`` lines (``#`` comments). Every key has a
documented SI unit baked into its name. The sweep runs every (tree kind,
seed) cell on one shared topology per seed, so kind comparisons are
paired; results land in ``results.csv`` and per-kind aggregates in
``summary.csv``. WSN_SIM_THREADS caps how many cells run at once.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import os
import statistics
import sys
from dataclasses import dataclass, fields, replace

from .clustering import save_clusters
from .radio import RadioProfile
from .scheduler import save_schedule, save_timelines, schedule_tree
from .simkernel import Metrics, SensingModel, dump_trace, run_simulation
from .topology import generate_topology, save_topology
from .tree import KINDS, build_tree, save_tree


class ConfigError(ValueError):
    """Bad config file, key, value, or CLI usage; exits with status 1."""


@dataclass(frozen=True)
class ExperimentConfig:
    nodes: int
    comm_range_m: float
    seeds: tuple[int, ...]
    width_m: float = 100.0
    height_m: float = 100.0
    interference_factor: float = 2.0
    base_x_m: float | None = None
    base_y_m: float | None = None
    topology_retries: int = 1000
    trees: tuple[str, ...] = ("bfs", "spt", "mst")
    frames: int = 100
    slot_duration_s: float | None = None  # None = auto per tree
    aggregation_ratio: float = 1.0
    sensing_model: str = "every-frame"
    sensing_p: float = 0.5
    initial_energy_j: float = 2.0
    duty_cycle: bool = True
    trace: bool = False
    output_dir: str = "out"
    p_listen_w: float = 0.060
    p_receive_w: float = 0.060
    p_sleep_w: float = 0.0001
    e_elec_j_per_bit: float = 50e-9
    e_amp_j_per_bit_m2: float = 100e-12
    t_sleep_to_active_s: float = 0.002
    t_active_to_sleep_s: float = 0.002
    bitrate_bps: float = 250_000.0
    packet_bits: int = 1024

    def profile(self) -> RadioProfile:
        return RadioProfile(
            p_listen=self.p_listen_w, p_receive=self.p_receive_w,
            p_sleep=self.p_sleep_w, e_elec=self.e_elec_j_per_bit,
            e_amp=self.e_amp_j_per_bit_m2,
            t_sleep_to_active=self.t_sleep_to_active_s,
            t_active_to_sleep=self.t_active_to_sleep_s,
            bitrate=self.bitrate_bps, packet_bits=self.packet_bits)

    def base_pos(self) -> tuple[float, float] | None:
        if self.base_x_m is None:
            return None
        return (self.base_x_m, self.base_y_m)


@dataclass(frozen=True)
class KindStats:
    mean_energy: float
    sd_energy: float
    mean_latency: float
    sd_latency: float


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[tuple[str, int, Metrics], ...]
    stats: dict[str, KindStats]
    winner: str


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _parse_seeds(text: str) -> tuple[int, ...]:
    seeds: list[int] = []
    for token in text.replace(",", " ").split():
        if ".." in token:
            lo, hi = token.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(token))
    if len(set(seeds)) != len(seeds):
        raise ValueError("duplicate seeds")
    return tuple(seeds)


def _parse_trees(text: str) -> tuple[str, ...]:
    kinds = tuple(t.strip() for t in text.split(",") if t.strip())
    for k in kinds:
        if k not in KINDS:
            raise ValueError(f"unknown tree kind {k!r}; expected "
                             f"{', '.join(KINDS)}")
    if len(set(kinds)) != len(kinds):
        raise ValueError("duplicate tree kinds")
    return kinds


def _parse_slot(text: str) -> float | None:
    if text.lower() == "auto":
        return None
    return float(text)


def _parse_str(text: str) -> str:
    return text


_PARSERS = {
    "nodes": _parse_int, "comm_range_m": _parse_float,
    "seeds": _parse_seeds, "width_m": _parse_float,
    "height_m": _parse_float, "interference_factor": _parse_float,
    "base_x_m": _parse_float, "base_y_m": _parse_float,
    "topology_retries": _parse_int, "trees": _parse_trees,
    "frames": _parse_int, "slot_duration_s": _parse_slot,
    "aggregation_ratio": _parse_float, "sensing_model": _parse_str,
    "sensing_p": _parse_float, "initial_energy_j": _parse_float,
    "duty_cycle": _parse_bool, "trace": _parse_bool,
    "output_dir": _parse_str, "p_listen_w": _parse_float,
    "p_receive_w": _parse_float, "p_sleep_w": _parse_float,
    "e_elec_j_per_bit": _parse_float, "e_amp_j_per_bit_m2": _parse_float,
    "t_sleep_to_active_s": _parse_float, "t_active_to_sleep_s": _parse_float,
    "bitrate_bps": _parse_float, "packet_bits": _parse_int,
}

_REQUIRED = ("nodes", "comm_range_m", "seeds")


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a flat key = value config file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def parse_config_text(text: str, name: str = "<config>") -> ExperimentConfig:
    values: dict[str, object] = {}
    seen_lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{lineno}: expected 'key = value', "
                              f"got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{name}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{name}:{lineno}: duplicate key {key!r} "
                              f"(first set on line {seen_lines[key]})")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{name}:{lineno}: bad value for "
                              f"{key!r}: {exc}") from None
        seen_lines[key] = lineno
    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"{name}: missing required key {key!r}")
    config = ExperimentConfig(**values)
    validate_config(config)
    return config


def validate_config(config: ExperimentConfig) -> None:
    if config.nodes < 2:
        raise ConfigError("nodes must be >= 2")
    if config.comm_range_m <= 0:
        raise ConfigError("comm_range_m must be > 0")
    if config.width_m <= 0 or config.height_m <= 0:
        raise ConfigError("width_m and height_m must be > 0")
    if config.interference_factor < 1:
        raise ConfigError("interference_factor must be >= 1")
    if (config.base_x_m is None) != (config.base_y_m is None):
        raise ConfigError("base_x_m and base_y_m must be set together")
    if config.topology_retries < 1:
        raise ConfigError("topology_retries must be >= 1")
    if not config.seeds:
        raise ConfigError("seeds must be nonempty")
    if not config.trees:
        raise ConfigError("trees must be nonempty")
    if config.frames < 1:
        raise ConfigError("frames must be >= 1")
    if config.slot_duration_s is not None and config.slot_duration_s <= 0:
        raise ConfigError("slot_duration_s must be > 0 or auto")
    if not 0 < config.aggregation_ratio <= 1:
        raise ConfigError("aggregation_ratio must be in (0, 1]")
    if config.sensing_model not in ("every-frame", "bernoulli"):
        raise ConfigError("sensing_model must be every-frame or bernoulli")
    if not 0 < config.sensing_p <= 1:
        raise ConfigError("sensing_p must be in (0, 1]")
    if config.initial_energy_j <= 0:
        raise ConfigError("initial_energy_j must be > 0")
    if config.p_sleep_w >= config.p_listen_w:
        raise ConfigError("p_sleep_w must be below p_listen_w "
                          f"({config.p_sleep_w} >= {config.p_listen_w})")
    try:
        config.profile()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical text form; parse(serialize(c)) == c."""
    out = []
    for f in fields(ExperimentConfig):
        value = getattr(config, f.name)
        if value is None:
            if f.name == "slot_duration_s":
                out.append("slot_duration_s = auto")
            continue  # unset optional base position
        if isinstance(value, bool):
            text = "on" if value else "off"
        elif isinstance(value, tuple):
            text = ",".join(str(v) for v in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        out.append(f"{f.name} = {text}")
    return "\n".join(out) + "\n"


def _sensing_for(config: ExperimentConfig, seed: int) -> SensingModel:
    # derived stream seed; offset decorrelates it from the position draws
    return SensingModel(kind=config.sensing_model, p=config.sensing_p,
                        seed=(seed << 1) ^ 0x5EED)


def run_cell(config: ExperimentConfig, kind: str, seed: int,
             write_artifacts: bool = False) -> Metrics:
    """Run one (tree kind, seed) cell; optionally dump its artifacts."""
    try:
        topo = generate_topology(
            config.nodes, config.width_m, config.height_m,
            config.comm_range_m, config.interference_factor, seed,
            base_pos=config.base_pos(), retry_limit=config.topology_retries)
        tree = build_tree(topo, kind)
        profile = config.profile()
        schedule = schedule_tree(topo, tree, profile,
                                 slot_duration=config.slot_duration_s)
        metrics, _, trace = run_simulation(
            topo, tree, schedule, profile, config.frames,
            sensing=_sensing_for(config, seed),
            initial_energy=config.initial_energy_j,
            duty_cycle=config.duty_cycle,
            aggregation_ratio=config.aggregation_ratio,
            collect_trace=write_artifacts)
    except Exception as exc:
        raise type(exc)(f"[kind={kind} seed={seed}] {exc}") from exc
    if write_artifacts:
        out = config.output_dir
        save_topology(topo, os.path.join(out, f"topology_s{seed}.csv"))
        save_tree(tree, os.path.join(out, f"tree_{kind}_s{seed}.csv"))
        save_clusters(schedule.clusters,
                      os.path.join(out, f"clusters_{kind}_s{seed}.csv"))
        save_schedule(schedule,
                      os.path.join(out, f"schedule_{kind}_s{seed}.csv"))
        save_timelines(schedule, tree, profile,
                       os.path.join(out, f"timeline_{kind}_s{seed}.csv"),
                       duty_cycle=config.duty_cycle)
        dump_trace(trace, os.path.join(out, f"trace_{kind}_s{seed}.csv"))
    return metrics


def _cell_worker(args):
    config, kind, seed = args
    return kind, seed, run_cell(config, kind, seed)


def _max_workers() -> int:
    raw = os.environ.get("WSN_SIM_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(
            f"WSN_SIM_THREADS must be a positive integer, got {raw!r}")
    if workers < 1:
        raise ConfigError(
            f"WSN_SIM_THREADS must be a positive integer, got {raw!r}")
    return workers


def run_comparison(config: ExperimentConfig) -> ComparisonReport:
    """Run every (kind, seed) cell, write results.csv and summary.csv."""
    os.makedirs(config.output_dir, exist_ok=True)
    cells = [(config, kind, seed)
             for kind in config.trees for seed in config.seeds]
    workers = min(_max_workers(), len(cells))
    results: dict[tuple[str, int], Metrics] = {}
    if workers > 1 and not config.trace:
        try:
            with concurrent.futures.ProcessPoolExecutor(workers) as pool:
                for kind, seed, metrics in pool.map(_cell_worker, cells):
                    results[(kind, seed)] = metrics
        except OSError:
            results.clear()
    if not results:
        # trace mode keeps one writer; also the pool fallback
        for config_, kind, seed in cells:
            results[(kind, seed)] = run_cell(config_, kind, seed,
                                             write_artifacts=config.trace)

    rows = tuple((kind, seed, results[(kind, seed)])
                 for kind in config.trees for seed in config.seeds)
    stats: dict[str, KindStats] = {}
    for kind in config.trees:
        energies = [m.total_energy for k, _, m in rows if k == kind]
        latencies = [m.mean_delivery_latency for k, _, m in rows if k == kind]
        stats[kind] = KindStats(
            mean_energy=statistics.mean(energies),
            sd_energy=statistics.stdev(energies) if len(energies) > 1 else 0.0,
            mean_latency=statistics.mean(latencies),
            sd_latency=(statistics.stdev(latencies)
                        if len(latencies) > 1 else 0.0))
    winner = min(config.trees, key=lambda k: stats[k].mean_energy)
    report = ComparisonReport(rows=rows, stats=stats, winner=winner)
    _write_results(config, report)
    return report


def _write_results(config: ExperimentConfig, report: ComparisonReport) -> None:
    out = config.output_dir
    with open(os.path.join(out, "results.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tree", "seed", "total_energy_J", "mean_latency_s",
                         "packets_delivered", "first_death_s", "frames_run"])
        for kind, seed, m in report.rows:
            writer.writerow([
                kind, seed, repr(m.total_energy),
                repr(m.mean_delivery_latency), m.packets_delivered,
                "" if m.first_death_time is None else repr(m.first_death_time),
                m.frames_run])
    with open(os.path.join(out, "summary.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tree", "mean_energy_J", "sd_energy_J",
                         "mean_latency_s", "sd_latency_s"])
        for kind in config.trees:
            s = report.stats[kind]
            writer.writerow([kind, repr(s.mean_energy), repr(s.sd_energy),
                             repr(s.mean_latency), repr(s.sd_latency)])
    with open(os.path.join(out, "config_effective.cfg"), "w") as fh:
        fh.write(serialize_config(config))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wsn-dutysim",
                     description="TDMA duty-cycling sensor network simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run all (tree, seed) cells of a config"),
                            ("compare", "run cells and print the per-kind "
                                        "comparison table")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file path")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--trace", action="store_true",
                       help="dump per-cell trace/topology/schedule CSVs")
        p.add_argument("--no-duty-cycle", action="store_true",
                       help="keep radios listening through every gap")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        config = parse_config(args.config)
        if args.out:
            config = replace(config, output_dir=args.out)
        if args.trace:
            config = replace(config, trace=True)
        if args.no_duty_cycle:
            config = replace(config, duty_cycle=False)
        validate_config(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        report = run_comparison(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    if args.command == "run":
        for kind, seed, m in report.rows:
            death = ("" if m.first_death_time is None
                     else f"  first_death={m.first_death_time:.3f}s")
            print(f"{kind} seed={seed}  energy={m.total_energy:.6f}J  "
                  f"latency={m.mean_delivery_latency * 1000:.3f}ms  "
                  f"delivered={m.packets_delivered}  "
                  f"frames={m.frames_run}{death}")
    else:
        print(f"{'tree':<6} {'mean_energy_J':>14} {'sd':>12} "
              f"{'mean_latency_ms':>16} {'sd_ms':>10}")
        for kind in config.trees:
            s = report.stats[kind]
            print(f"{kind:<6} {s.mean_energy:>14.6f} {s.sd_energy:>12.6f} "
                  f"{s.mean_latency * 1000:>16.3f} "
                  f"{s.sd_latency * 1000:>10.3f}")
        print(f"winner: {report.winner}")
    print(f"wrote {os.path.join(config.output_dir, 'results.csv')} and "
          f"summary.csv", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
