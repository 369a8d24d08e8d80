"""dcfsim: discrete-event simulation of IEEE 802.11 DCF ad-hoc multi-hop
networks carrying TCP/FTP traffic, plus a sweep harness for studying the
short retry limit and contention-window bounds."""

from .engine import EventScheduler, Rng, SchedulingError, TraceLog
from .harness import (DEFAULT_CW_PAIRS, DEFAULT_CWMAX_VALUES,
                      DEFAULT_CWMIN_VALUES, DEFAULT_RETRY_VALUES, SweepSpec,
                      apply_sweep_value, run_single, run_sweep, write_csv,
                      write_plot_data)
from .mac import DcfMac, Frame, MacCounters, MacParams, frame_airtime_ns
from .metrics import AccountingError, MetricsCollector, MetricsReport
from .radio import (InvalidGeometryError, Medium, RadioParams,
                    capture_outcome, crossover_distance_m,
                    propagation_delay_ns, received_power)
from .routing import RoutingError, compute_routes, path, require_route
from .scenario import (ConfigError, FlowSpec, ScenarioConfig, Topology,
                       adjacency_from_positions, build_dumbbell,
                       load_scenario_file)
from .simulation import Simulation
from .tcp import Segment, TcpParams, TcpReceiver, TcpSender

__version__ = "0.1.0"

__all__ = [
    "AccountingError", "ConfigError", "DcfMac", "DEFAULT_CW_PAIRS",
    "DEFAULT_CWMAX_VALUES", "DEFAULT_CWMIN_VALUES", "DEFAULT_RETRY_VALUES",
    "EventScheduler", "FlowSpec", "Frame", "InvalidGeometryError",
    "MacCounters", "MacParams", "Medium", "MetricsCollector",
    "MetricsReport", "RadioParams", "Rng", "RoutingError", "ScenarioConfig",
    "SchedulingError", "Segment", "Simulation", "SweepSpec", "TcpParams",
    "TcpReceiver", "TcpSender", "Topology", "TraceLog",
    "adjacency_from_positions", "apply_sweep_value", "build_dumbbell",
    "capture_outcome", "compute_routes", "crossover_distance_m",
    "frame_airtime_ns", "load_scenario_file", "path", "propagation_delay_ns",
    "received_power", "require_route", "run_single", "run_sweep",
    "write_csv", "write_plot_data",
]
