"""Shared builders for driving the MAC/radio layers directly in tests."""

from __future__ import annotations

import pytest

from dcfsim import (EventScheduler, MacParams, Medium, RadioParams, Rng,
                    TraceLog, propagation_delay_ns)
from dcfsim.mac import ACK, DcfMac, Frame, OutboundPacket
from dcfsim.tcp import SEG_DATA, Segment


class StubHost:
    """Collects what the MAC hands upward instead of routing it."""

    def __init__(self):
        self.accepted = []
        self.drops = []

    def accept_segment(self, segment):
        self.accepted.append(segment)

    def record_drop(self, packet, reason):
        self.drops.append((packet, reason))


class ScriptedRng(Rng):
    """Pops scripted uniform_int values first, then falls back to the
    real seeded stream."""

    def __init__(self, script, seed=1):
        super().__init__(seed)
        self.script = list(script)

    def uniform_int(self, upper):
        if self.script:
            return self.script.pop(0)
        return super().uniform_int(upper)


class Cell:
    """A bare radio cell: engine, medium, and one DCF MAC per position."""

    def __init__(self, positions, mac_params=None, radio=None, rng=None):
        self.engine = EventScheduler()
        self.params = mac_params or MacParams()
        self.radio = radio or RadioParams()
        self.rng = rng or Rng(1)
        self.trace = TraceLog()
        self.medium = Medium(self.engine, positions, self.radio)
        self.hosts = []
        self.macs = []
        guard = 2 * propagation_delay_ns(2500.0)
        for i in range(len(positions)):
            host = StubHost()
            mac = DcfMac(i, f"N{i}", self.params, self.engine, self.medium,
                         self.rng, host, guard, self.trace)
            self.medium.attach_mac(i, mac)
            self.hosts.append(host)
            self.macs.append(mac)
        self._next_hop_id = 0
        self._next_seq = 0

    def packet(self, dst, size_bytes=1500):
        """A standalone outbound packet (no metrics tracking)."""
        self._next_hop_id += 1
        self._next_seq += 1
        seg = Segment(0, SEG_DATA, self._next_seq, size_bytes, 0, dst, 0)
        return OutboundPacket(seg, dst, self._next_hop_id)

    def inject_noise(self, node, start, airtime):
        """Occupy the channel from `node` without engaging any MAC state:
        a zero-duration ACK addressed to the sender itself."""
        frame = Frame(ACK, node, node, 0, 0)
        self.engine.schedule_at(
            start, self.medium.begin_transmission, node, frame, airtime)

    def events(self, name=None, node=None):
        out = []
        for line in self.trace.lines:
            rec = parse_trace_line(line)
            if name is not None and rec["ev"] != name:
                continue
            if node is not None and rec["n"] != node:
                continue
            out.append(rec)
        return out


def parse_trace_line(line):
    rec = dict(kv.split("=", 1) for kv in line.split())
    for key in ("t", "cw", "sr", "lr", "air", "slots"):
        if key in rec:
            rec[key] = int(rec[key])
    return rec


@pytest.fixture
def cell_pair():
    """Two nodes 200 m apart (well inside decode range)."""
    return Cell([(0.0, 0.0), (200.0, 0.0)])
