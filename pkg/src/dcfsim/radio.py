"""Radio propagation, carrier sensing, and reception/capture resolution.

The propagation model is two-ray ground with a free-space (Friis) segment
below the crossover distance, the classic companion of the WaveLAN DSSS
parameter set used here. With the default transmit power of 0.2818 W and
1.5 m antennas the decode range works out to ~250 m and the carrier-sense
range to ~550 m, so 200 m neighbours decode each other and 400 m pairs
only sense each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT_M_S = 299_792_458.0

DECODED = "decoded"
COLLISION = "collision"
BELOW_THRESHOLD = "below-threshold"


class InvalidGeometryError(ValueError):
    """Non-positive distance handed to the propagation model."""


@dataclass
class RadioParams:
    bandwidth_bps: int = 2_000_000
    frequency_hz: float = 914e6
    capture_threshold_db: float = 10.0
    # Thresholds are linear watts (the values are plainly powers, not dBm).
    carrier_sense_threshold_w: float = 1.559e-11
    receive_threshold_w: float = 3.562e-10
    tx_power_w: float = 0.2818
    antenna_gain_tx: float = 1.0
    antenna_gain_rx: float = 1.0
    antenna_height_m: float = 1.5

    def __post_init__(self):
        if self.receive_threshold_w <= self.carrier_sense_threshold_w:
            raise ValueError("receive threshold must exceed carrier-sense threshold")
        for name in ("carrier_sense_threshold_w", "receive_threshold_w", "tx_power_w",
                     "antenna_gain_tx", "antenna_gain_rx", "antenna_height_m",
                     "frequency_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.bandwidth_bps <= 0:
            raise ValueError("bandwidth_bps must be positive")

    @property
    def capture_ratio(self):
        """Linear power ratio equivalent of the capture threshold."""
        return 10.0 ** (self.capture_threshold_db / 10.0)

    @property
    def wavelength_m(self):
        return SPEED_OF_LIGHT_M_S / self.frequency_hz


def crossover_distance_m(params: RadioParams) -> float:
    """Distance where the Friis and two-ray formulas intersect."""
    return (4.0 * math.pi * params.antenna_height_m * params.antenna_height_m
            / params.wavelength_m)


def received_power(d_m: float, params: RadioParams) -> float:
    """Received power in watts at distance d_m.

    Friis free-space below the crossover distance, two-ray ground at and
    beyond it; the two agree exactly at the crossover by construction.
    """
    if d_m <= 0:
        raise InvalidGeometryError(f"distance must be positive, got {d_m}")
    pt = params.tx_power_w * params.antenna_gain_tx * params.antenna_gain_rx
    if d_m < crossover_distance_m(params):
        lam = params.wavelength_m
        return pt * lam * lam / ((4.0 * math.pi * d_m) ** 2)
    h2 = params.antenna_height_m * params.antenna_height_m
    return pt * h2 * h2 / (d_m ** 4)


def propagation_delay_ns(d_m: float) -> int:
    """Signal flight time over d_m metres, rounded to the nearest ns."""
    return round(d_m / SPEED_OF_LIGHT_M_S * 1e9)


def capture_outcome(power_w, overlapping_powers_w, params: RadioParams) -> str:
    """Resolve one reception against the set of temporally overlapping
    signal powers seen at the same node.

    Decoded only if the frame is above the receive threshold and beats
    every single overlapping signal by at least the capture ratio.
    """
    if power_w < params.receive_threshold_w:
        return BELOW_THRESHOLD
    ratio = params.capture_ratio
    for other in overlapping_powers_w:
        if power_w < other * ratio:
            return COLLISION
    return DECODED


class _Signal:
    """One transmission as perceived at one node: arrival window and power.

    A node's own transmission is modelled as an infinite-power signal at
    itself, which both marks the channel busy and voids any reception that
    overlaps it (half duplex).
    """

    __slots__ = ("power", "start", "end", "frame", "counts_cs", "decodable")

    def __init__(self, power, start, end, frame, counts_cs, decodable):
        self.power = power
        self.start = start
        self.end = end
        self.frame = frame
        self.counts_cs = counts_cs
        self.decodable = decodable


class _NodeRadio:
    __slots__ = ("mac", "signals", "busy_count", "phys_idle_since")

    def __init__(self):
        self.mac = None
        self.signals = []
        self.busy_count = 0
        # Far in the past: an untouched medium counts as idle "forever".
        self.phys_idle_since = -(1 << 62)


class Medium:
    """Shared radio medium over a fixed set of node positions.

    Per-pair powers and propagation delays are precomputed once (static
    nodes). A transmission creates signal-arrival windows only at nodes
    that can at least be interfered with: everything weaker than both the
    carrier-sense threshold and (receive threshold / capture ratio) can
    neither mark the channel busy nor flip a capture decision, so it is
    skipped entirely.
    """

    def __init__(self, engine, positions, params: RadioParams):
        self.engine = engine
        self.params = params
        # Signals are kept past their end long enough for any still
        # in-flight frame that overlaps them to resolve, so the horizon
        # must exceed the longest airtime seen; it grows if needed.
        self._gc_horizon = 7_000_000
        self.positions = list(positions)
        self.capture_ratio = params.capture_ratio
        n = len(self.positions)
        self.nodes = [_NodeRadio() for _ in range(n)]
        sense_floor = min(params.carrier_sense_threshold_w,
                          params.receive_threshold_w / self.capture_ratio)
        cs = params.carrier_sense_threshold_w
        rx = params.receive_threshold_w
        self.reach = [[] for _ in range(n)]
        for i in range(n):
            xi, yi = self.positions[i]
            for j in range(n):
                if i == j:
                    continue
                xj, yj = self.positions[j]
                d = math.hypot(xi - xj, yi - yj)
                p = received_power(d, params)
                if p < sense_floor:
                    continue
                self.reach[i].append(
                    (j, propagation_delay_ns(d), p, p >= cs, p >= rx)
                )

    def attach_mac(self, node_id, mac):
        self.nodes[node_id].mac = mac

    def channel_busy(self, node_id) -> bool:
        """Physical carrier sense: any impinging signal at or above the
        carrier-sense threshold, or the node's own transmission."""
        return self.nodes[node_id].busy_count > 0

    def phys_idle_since(self, node_id):
        return self.nodes[node_id].phys_idle_since

    def begin_transmission(self, node_id, frame, airtime_ns):
        """Put a frame on the air. Returns its end time at the sender."""
        engine = self.engine
        schedule = engine.schedule_at
        now = engine.now
        end = now + airtime_ns
        if airtime_ns >= self._gc_horizon:
            self._gc_horizon = airtime_ns + 1_000_000
        own = _Signal(math.inf, now, end, None, True, False)
        nr = self.nodes[node_id]
        nr.signals.append(own)
        nr.busy_count += 1
        if nr.busy_count == 1:
            nr.mac.on_medium_busy()
        schedule(end, self._own_end, nr, frame)
        sig_start = self._sig_start
        sig_end = self._sig_end
        for j, pd, power, counts_cs, decodable in self.reach[node_id]:
            sig = _Signal(power, now + pd, end + pd, frame, counts_cs, decodable)
            schedule(now + pd, sig_start, self.nodes[j], sig)
            schedule(end + pd, sig_end, self.nodes[j], sig)
        return end

    def _own_end(self, nr, frame):
        nr.busy_count -= 1
        idle = nr.busy_count == 0
        if idle:
            nr.phys_idle_since = self.engine.now
        nr.mac.on_own_tx_end(frame)
        if idle:
            nr.mac.on_medium_maybe_idle()

    @staticmethod
    def _sig_start(nr, sig):
        nr.signals.append(sig)
        if sig.counts_cs:
            nr.busy_count += 1
            if nr.busy_count == 1:
                nr.mac.on_medium_busy()

    def _sig_end(self, nr, sig):
        now = self.engine.now
        idle = False
        if sig.counts_cs:
            nr.busy_count -= 1
            if nr.busy_count == 0:
                nr.phys_idle_since = now
                idle = True
        if sig.decodable:
            decoded = True
            ratio = self.capture_ratio
            power = sig.power
            start = sig.start
            end = sig.end
            for other in nr.signals:
                if (other.start < end and other.end > start
                        and power < other.power * ratio and other is not sig):
                    decoded = False
                    break
            if decoded:
                nr.mac.on_frame_decoded(sig.frame)
            else:
                nr.mac.on_frame_destroyed(sig.frame)
        if len(nr.signals) > 24:
            cutoff = now - self._gc_horizon
            nr.signals = [s for s in nr.signals if s.end > cutoff]
        if idle:
            nr.mac.on_medium_maybe_idle()
