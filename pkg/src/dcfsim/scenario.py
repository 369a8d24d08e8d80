"""Scenario construction: the dumbbell topology, per-run configuration,
and the scenario file format.

The dumbbell places the intermediate chain on a horizontal line at the
node spacing, with two edge nodes on each end set 200 m out at +-45
degrees from the first/last chain node. Edge nodes decode only their
adjacent chain node; chain nodes decode only their immediate neighbours.
Four FTP/TCP flows cross the chain from the left edge nodes to the right
ones, staggered at one-second starts.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace

from .engine import SEC
from .mac import MacParams
from .radio import RadioParams, received_power
from .tcp import TcpParams

ALLOWED_INTERMEDIATE_COUNTS = (6, 8, 10)


class ConfigError(ValueError):
    """Invalid scenario configuration or scenario file."""


@dataclass
class FlowSpec:
    src: int
    dst: int
    start_time_ns: int


@dataclass
class Topology:
    names: list
    positions: list
    adjacency: dict
    flows: list


@dataclass
class ScenarioConfig:
    n_intermediate: int = 6
    duration_s: float = 200.0
    node_spacing_m: float = 200.0
    field_w_m: float = 1500.0   # descriptive metadata, not a clamp
    field_h_m: float = 1200.0
    n_flows: int = 4
    payload_bytes: int = 1500
    seed: int = 1
    flow_stagger_s: float = 1.0
    allow_any_n: bool = False
    mac: MacParams = field(default_factory=MacParams)
    radio: RadioParams = field(default_factory=RadioParams)
    tcp: TcpParams = field(default_factory=TcpParams)

    def validate(self):
        if not self.allow_any_n and self.n_intermediate not in ALLOWED_INTERMEDIATE_COUNTS:
            raise ConfigError(
                f"n_intermediate must be one of {ALLOWED_INTERMEDIATE_COUNTS} "
                f"(got {self.n_intermediate}); pass allow_any_n to override")
        if self.n_intermediate < 1:
            raise ConfigError("n_intermediate must be >= 1")
        if self.duration_s < 0:
            raise ConfigError("duration_s must be >= 0")
        if self.node_spacing_m <= 0:
            raise ConfigError("node_spacing_m must be positive")
        if self.n_flows < 1 or self.n_flows > 4:
            raise ConfigError("n_flows must be between 1 and 4")
        if self.payload_bytes <= 0:
            raise ConfigError("payload_bytes must be positive")
        return self

    @property
    def duration_ns(self):
        return round(self.duration_s * SEC)

    @property
    def total_nodes(self):
        return self.n_intermediate + 4


def adjacency_from_positions(positions, radio: RadioParams):
    """Pairs within decode range of each other (symmetric by geometry)."""
    n = len(positions)
    adj = {i: [] for i in range(n)}
    for i in range(n):
        xi, yi = positions[i]
        for j in range(i + 1, n):
            d = math.hypot(xi - positions[j][0], yi - positions[j][1])
            if received_power(d, radio) >= radio.receive_threshold_w:
                adj[i].append(j)
                adj[j].append(i)
    return adj


def build_dumbbell(cfg: ScenarioConfig) -> Topology:
    """Node ids: L1=0, L2=1, I1..In=2..n+1, R1=n+2, R2=n+3."""
    cfg.validate()
    n = cfg.n_intermediate
    spacing = cfg.node_spacing_m
    y_mid = cfg.field_h_m / 2.0
    x0 = spacing * 0.75  # keeps the 45-degree edge nodes at positive x
    off = spacing / math.sqrt(2.0)

    names = ["L1", "L2"] + [f"I{k}" for k in range(1, n + 1)] + ["R1", "R2"]
    first_x = x0
    last_x = x0 + (n - 1) * spacing
    positions = [
        (first_x - off, y_mid + off),   # L1
        (first_x - off, y_mid - off),   # L2
    ]
    positions += [(x0 + k * spacing, y_mid) for k in range(n)]
    positions += [
        (last_x + off, y_mid + off),    # R1
        (last_x + off, y_mid - off),    # R2
    ]

    l1, l2 = 0, 1
    r1, r2 = n + 2, n + 3
    stagger = round(cfg.flow_stagger_s * SEC)
    pairs = [(l1, r1), (l1, r2), (l2, r1), (l2, r2)]
    flows = [FlowSpec(src, dst, i * stagger)
             for i, (src, dst) in enumerate(pairs[: cfg.n_flows])]

    return Topology(
        names=names,
        positions=positions,
        adjacency=adjacency_from_positions(positions, cfg.radio),
        flows=flows,
    )


# ----------------------------------------------------------------------
# Scenario file: flat key/value sections mirroring the config field names.
#
#   [scenario]
#   n_intermediate = 6
#   duration_s = 200.0
#   seed = 7
#
#   [mac]
#   cw_min = 31
#   cw_max = 1023
#
#   [radio]
#   tx_power_w = 0.2818
# ----------------------------------------------------------------------

_BOOL_STATES = {"true": True, "false": False, "1": True, "0": False,
                "yes": True, "no": False}


def _coerce(raw, ftype, key):
    try:
        if ftype is bool:
            return _BOOL_STATES[raw.strip().lower()]
        if ftype is int:
            return int(raw)
        if ftype is float:
            return float(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    raise ConfigError(f"unsupported field type for {key}")


def _section_fields(dc_type):
    return {f.name: f.type for f in fields(dc_type)}


def load_scenario_file(path) -> ScenarioConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read scenario file {path}")
    cfg = ScenarioConfig()
    plain = {f.name: f.type for f in fields(ScenarioConfig)
             if f.name not in ("mac", "radio", "tcp")}
    type_names = {"int": int, "float": float, "bool": bool}

    def apply(section, target, known):
        updates = {}
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            ftype = known[key]
            if isinstance(ftype, str):
                ftype = type_names.get(ftype, str)
            updates[key] = _coerce(raw, ftype, key)
        return replace(target, **updates) if updates else target

    for section in parser.sections():
        if section == "scenario":
            cfg = apply(section, cfg, plain)
        elif section == "mac":
            cfg = replace(cfg, mac=apply(section, cfg.mac, _section_fields(MacParams)))
        elif section == "radio":
            cfg = replace(cfg, radio=apply(section, cfg.radio,
                                           _section_fields(RadioParams)))
        elif section == "tcp":
            cfg = replace(cfg, tcp=apply(section, cfg.tcp, _section_fields(TcpParams)))
        else:
            raise ConfigError(f"unknown section [{section}] in scenario file")
    return cfg
