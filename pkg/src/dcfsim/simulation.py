"""Wires one scenario into a runnable network: event engine, medium, one
DCF MAC per node, static routes, and the TCP/FTP flows."""

from __future__ import annotations

import math

from .engine import EventScheduler, Rng, TraceLog
from .mac import DROP_NOROUTE, DcfMac, OutboundPacket
from .metrics import MetricsCollector
from .radio import Medium, propagation_delay_ns
from .routing import compute_routes, require_route
from .scenario import ScenarioConfig, Topology, build_dumbbell
from .tcp import SEG_DATA, TcpReceiver, TcpSender


class _NodeHost:
    """Per-node callbacks the MAC needs: where decoded payloads go and how
    terminal drops are booked."""

    __slots__ = ("sim", "node_id")

    def __init__(self, sim, node_id):
        self.sim = sim
        self.node_id = node_id

    def accept_segment(self, segment):
        self.sim._segment_at(segment, self.node_id)

    def record_drop(self, packet, reason):
        copy = packet.segment.copy
        if copy is not None:
            self.sim.metrics.record_drop(copy, reason, self.node_id,
                                         self.sim.engine.now)


class Simulation:
    def __init__(self, cfg: ScenarioConfig, topology: Topology = None,
                 rng: Rng = None, trace: bool = False):
        cfg.validate()
        self.cfg = cfg
        self.topology = topology if topology is not None else build_dumbbell(cfg)
        self.engine = EventScheduler()
        self.rng = rng if rng is not None else Rng(cfg.seed)
        self.metrics = MetricsCollector()
        self.trace = TraceLog() if trace else None
        self.medium = Medium(self.engine, self.topology.positions, cfg.radio)
        self.routes = compute_routes(self.topology.adjacency)

        # Timeout slack covers two propagation times over the field
        # diagonal, the worst case for any awaited response frame.
        diag = math.hypot(cfg.field_w_m, cfg.field_h_m)
        guard = 2 * propagation_delay_ns(diag)

        self.macs = []
        self._hop_seq = 0
        for node_id, name in enumerate(self.topology.names):
            mac = DcfMac(node_id, name, cfg.mac, self.engine, self.medium,
                         self.rng, _NodeHost(self, node_id), guard, self.trace)
            self.medium.attach_mac(node_id, mac)
            self.macs.append(mac)

        self.senders = {}
        self.receivers = {}
        for flow_id, flow in enumerate(self.topology.flows):
            # Both directions must be routable before the run starts.
            require_route(self.routes, flow.src, flow.dst)
            require_route(self.routes, flow.dst, flow.src)
            sender = TcpSender(flow_id, flow.src, flow.dst, self.engine,
                               self, self.metrics, cfg.tcp)
            receiver = TcpReceiver(flow_id, flow.src, flow.dst, self.engine,
                                   self, self.metrics, cfg.tcp)
            self.senders[flow_id] = sender
            self.receivers[flow_id] = receiver
            self.engine.schedule_at(flow.start_time_ns, sender.start)

    # ------------------------------------------------------------------
    def send_segment(self, segment):
        """Transport emission: route from the segment's current holder."""
        self._route_segment(segment, segment.src)

    def _route_segment(self, segment, at_node):
        hop = self.routes.get((at_node, segment.dst))
        if hop is None:
            if segment.copy is not None:
                self.metrics.record_drop(segment.copy, DROP_NOROUTE, at_node,
                                         self.engine.now)
            return
        self._hop_seq += 1
        self.macs[at_node].enqueue(OutboundPacket(segment, hop, self._hop_seq))

    def _segment_at(self, segment, node_id):
        """A decoded, non-duplicate payload arrived at node_id: hand it to
        the local transport or forward it along the route."""
        if segment.dst == node_id:
            if segment.kind == SEG_DATA:
                self.receivers[segment.flow_id].on_data(segment)
            else:
                self.senders[segment.flow_id].on_ack(segment.seq)
        else:
            self._route_segment(segment, node_id)

    # ------------------------------------------------------------------
    def in_network_copies(self):
        """Independent audit: tracked copies currently held by MAC queues
        (the head packet counts unless the next hop already took it)."""
        count = 0
        for mac in self.macs:
            head = mac.head
            if (head is not None and head.segment.copy is not None
                    and not head.accepted_downstream):
                count += 1
            for packet in mac.queue:
                if packet.segment.copy is not None:
                    count += 1
        return count

    def run(self):
        """Run to the configured duration and return the metrics report."""
        if self.cfg.duration_ns > 0:
            self.engine.run_until(self.cfg.duration_ns)
        return self.metrics.finalize(in_network_audit=self.in_network_copies())
