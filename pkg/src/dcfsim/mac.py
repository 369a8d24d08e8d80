"""IEEE 802.11 DCF medium access: carrier sensing, slotted backoff with
freeze/resume, contention-window doubling, the RTS/CTS/DATA/ACK exchange,
retry accounting, and MAC-level drops.

Backoff is event-driven rather than ticked: when the medium goes idle the
node schedules its transmission at idle_start + DIFS + remaining*slot, and
any busy transition before that cancels the timer and banks the fully
elapsed slots. This is arithmetically identical to per-slot countdown
("decrement once per idle slot, freeze while busy") without per-slot
events.

Channel state for access purposes combines physical carrier sense from the
radio with the NAV set from overheard RTS/CTS/DATA duration fields.
Response frames (CTS after an RTS, ACK after a DATA) go out a SIFS after
the eliciting frame regardless of carrier state; because SIFS < DIFS no
backoff can expire inside an ongoing exchange, which is what protects the
four-way handshake.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .engine import US

RTS = "RTS"
CTS = "CTS"
DATA = "DATA"
ACK = "ACK"

# Standard 802.11 frame overheads in bytes; control frames carry no payload.
MAC_OVERHEAD_BYTES = {DATA: 34, RTS: 20, CTS: 14, ACK: 14}

# Drop reasons (one terminal outcome per packet copy).
DROP_COLLISION = "Collision"
DROP_RETRY = "RetryLimitExceeded"
DROP_QUEUE = "QueueOverflow"
DROP_NOROUTE = "NoRoute"

# Spec-level MAC states, derived from the internal phase for tracing.
IDLE = "IDLE"
WAIT_DIFS = "WAIT_DIFS"
BACKOFF_COUNTING = "BACKOFF_COUNTING"
BACKOFF_FROZEN = "BACKOFF_FROZEN"
DEFER_NAV = "DEFER_NAV"
WAIT_CTS = "WAIT_CTS"
WAIT_ACK = "WAIT_ACK"
TRANSMITTING = "TRANSMITTING"


@dataclass
class MacParams:
    """802.11 DSSS PHY timing set plus the tunables under study."""

    slot_time_ns: int = 20 * US
    sifs_ns: int = 10 * US
    difs_ns: int = 50 * US
    cw_min: int = 31
    cw_max: int = 1023
    short_retry_limit: int = 7
    long_retry_limit: int = 4
    rts_threshold_bytes: int = 0
    plcp_overhead_ns: int = 192 * US
    queue_capacity: int = 50

    def __post_init__(self):
        for cw in (self.cw_min, self.cw_max):
            if cw <= 0 or (cw & (cw + 1)) != 0:
                raise ValueError(f"contention window {cw} is not of the form 2^k - 1")
        if self.cw_min > self.cw_max:
            raise ValueError("cw_min must not exceed cw_max")
        if self.short_retry_limit < 1 or self.long_retry_limit < 1:
            raise ValueError("retry limits must be >= 1")
        if self.difs_ns != self.sifs_ns + 2 * self.slot_time_ns:
            raise ValueError("difs must equal sifs + 2*slot")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")
        if self.rts_threshold_bytes < 0:
            raise ValueError("rts_threshold_bytes must be >= 0")


def frame_airtime_ns(kind, payload_bytes, params: MacParams, bandwidth_bps) -> int:
    """On-air duration: PLCP preamble+header plus serialized bytes."""
    bits = (MAC_OVERHEAD_BYTES[kind] + payload_bytes) * 8
    return params.plcp_overhead_ns + (bits * 1_000_000_000 + bandwidth_bps // 2) // bandwidth_bps


class Frame:
    """One on-air MAC frame."""

    __slots__ = ("kind", "src", "dst", "payload_bytes", "duration_ns", "packet")

    def __init__(self, kind, src, dst, payload_bytes, duration_ns, packet=None):
        self.kind = kind
        self.src = src
        self.dst = dst
        self.payload_bytes = payload_bytes
        self.duration_ns = duration_ns
        self.packet = packet


class OutboundPacket:
    """A queued transport segment plus its per-hop MAC bookkeeping.

    hop_id is constant across MAC retries of the same packet at the same
    hop; the receiver uses it to discard duplicates when a MAC ACK was
    lost. accepted_downstream marks that the receiver took the packet, so
    a later sender-side give-up must not also record a terminal drop.
    """

    __slots__ = ("segment", "next_hop", "hop_id", "accepted_downstream")

    def __init__(self, segment, next_hop, hop_id):
        self.segment = segment
        self.next_hop = next_hop
        self.hop_id = hop_id
        self.accepted_downstream = False


class MacCounters:
    """Contention window and per-packet retry counters.

    The window doubles along the 2^k - 1 orbit on any failed attempt and
    snaps back to cw_min on success or when the packet is discarded.
    Failures at the RTS stage (missing CTS) count against the short retry
    limit; failures at the DATA stage (missing ACK) against the long one.
    """

    __slots__ = ("params", "cw", "short_retry", "long_retry")

    def __init__(self, params: MacParams):
        self.params = params
        self.cw = params.cw_min
        self.short_retry = 0
        self.long_retry = 0

    def note_success(self):
        self.cw = self.params.cw_min
        self.short_retry = 0
        self.long_retry = 0

    def note_failure(self, stage) -> str:
        """Register a failed attempt; returns "retry" or "drop"."""
        self.cw = min(2 * self.cw + 1, self.params.cw_max)
        if stage == RTS:
            self.short_retry += 1
            exhausted = self.short_retry >= self.params.short_retry_limit
        else:
            self.long_retry += 1
            exhausted = self.long_retry >= self.params.long_retry_limit
        if exhausted:
            self.note_success()  # fresh packet, fresh window
            return "drop"
        return "retry"


class DcfMac:
    """The per-node DCF state machine.

    host must provide:
      accept_segment(segment): a decoded, non-duplicate DATA payload
          arrived here (deliver to transport or forward);
      record_drop(packet, reason): terminal drop of the head-of-queue or
          rejected packet (no-op for untracked segments).
    """

    _PHASE_IDLE = 0
    _PHASE_CONTEND = 1
    _PHASE_TX = 2          # own RTS or DATA on the air
    _PHASE_WAIT_CTS = 3
    _PHASE_DATA_GAP = 4    # CTS received, DATA scheduled a SIFS later
    _PHASE_WAIT_ACK = 5
    _PHASE_NEXT_WAIT = 6   # DIFS pause before the next packet's access

    def __init__(self, node_id, name, params, engine, medium, rng, host,
                 timeout_guard_ns, trace=None):
        self.node_id = node_id
        self.name = name
        self.params = params
        self.engine = engine
        self.medium = medium
        self.rng = rng
        self.host = host
        self.trace = trace
        self.counters = MacCounters(params)
        self.queue = deque()
        self.head = None
        self.phase = self._PHASE_IDLE
        self.nav_until = -(1 << 62)  # far past: virgin medium counts as idle
        self.backoff_remaining = 0
        self._counting = False
        self._count_start = 0
        self._pending = None      # backoff completion or NAV wake timer
        self._timeout = None      # CTS or ACK timeout
        self._resp_pending = None  # scheduled CTS/ACK response
        self._dedup = {}          # sender node -> last accepted hop_id
        self._nr = medium.nodes[node_id]  # direct radio-state view (hot path)
        bw = medium.params.bandwidth_bps
        self._air_rts = frame_airtime_ns(RTS, 0, params, bw)
        self._air_cts = frame_airtime_ns(CTS, 0, params, bw)
        self._air_ack = frame_airtime_ns(ACK, 0, params, bw)
        self._air_data = {}
        self._guard = timeout_guard_ns

    # ------------------------------------------------------------------
    # Queue interface
    # ------------------------------------------------------------------
    def enqueue(self, packet: OutboundPacket) -> bool:
        """Append an outbound packet; starts channel access if idle.

        Returns False (and records a QueueOverflow drop) when the
        interface queue is full.
        """
        if self.head is None:
            self.head = packet
            if self.trace:
                self._t("ENQ", f"dst={packet.next_hop}")
            self._try_access_fresh()
            return True
        if len(self.queue) >= self.params.queue_capacity:
            if self.trace:
                self._t("DROP_QUEUE", f"dst={packet.next_hop}")
            self.host.record_drop(packet, DROP_QUEUE)
            return False
        self.queue.append(packet)
        if self.trace:
            self._t("ENQ", f"dst={packet.next_hop}")
        return True

    @property
    def queue_len(self):
        return len(self.queue)

    # ------------------------------------------------------------------
    # Medium view
    # ------------------------------------------------------------------
    def _medium_idle_since(self):
        """Start of the current combined idle period, or None if the
        medium (physical carrier or NAV) is busy right now."""
        nr = self._nr
        if nr.busy_count > 0:
            return None
        since = nr.phys_idle_since
        if self.nav_until > since:
            since = self.nav_until
        if since > self.engine.now:
            return None  # NAV still running
        return since

    @property
    def state(self):
        """Externally visible DCF state name."""
        phase = self.phase
        if phase == self._PHASE_IDLE:
            return IDLE
        if phase == self._PHASE_NEXT_WAIT:
            return WAIT_DIFS
        if phase == self._PHASE_TX or phase == self._PHASE_DATA_GAP:
            return TRANSMITTING
        if phase == self._PHASE_WAIT_CTS:
            return WAIT_CTS
        if phase == self._PHASE_WAIT_ACK:
            return WAIT_ACK
        if self._counting:
            return BACKOFF_COUNTING
        if self._nr.busy_count > 0:
            return BACKOFF_FROZEN
        if self.nav_until > self.engine.now:
            return DEFER_NAV
        return WAIT_DIFS

    # ------------------------------------------------------------------
    # Channel access
    # ------------------------------------------------------------------
    def _try_access_fresh(self):
        """First access attempt for a new head packet: transmit at once if
        the medium has already been idle a full DIFS, otherwise draw a
        backoff and contend."""
        since = self._medium_idle_since()
        if since is not None and self.engine.now - since >= self.params.difs_ns:
            self._begin_exchange()
        else:
            self._enter_backoff()

    def _enter_backoff(self):
        self.backoff_remaining = self.rng.uniform_int(self.counters.cw)
        if self.trace:
            self._t("BACKOFF", f"slots={self.backoff_remaining}")
        self.phase = self._PHASE_CONTEND
        self._reschedule()

    def _reschedule(self):
        """Re-evaluate the pending-access timer after any medium change.

        Idempotent; freezes the slot count when the medium turns busy and
        schedules the completion when it is idle.
        """
        if self.phase != self._PHASE_CONTEND:
            return
        now = self.engine.now
        since = self._medium_idle_since()
        if since is None:
            if self._counting:
                elapsed = (now - self._count_start) // self.params.slot_time_ns
                if elapsed > 0:
                    self.backoff_remaining -= elapsed
                    if self.backoff_remaining < 0:
                        self.backoff_remaining = 0
                self._counting = False
            if self._pending is not None:
                self._pending.cancel()
                self._pending = None
            if self._nr.busy_count == 0 and self.nav_until > now:
                self._pending = self.engine.schedule_at(self.nav_until, self._on_wake)
            return
        if self._counting:
            return
        count_start = since + self.params.difs_ns
        if count_start < now:
            count_start = now
        self._count_start = count_start
        self._counting = True
        if self._pending is not None:
            self._pending.cancel()
        self._pending = self.engine.schedule_at(
            count_start + self.backoff_remaining * self.params.slot_time_ns,
            self._on_backoff_complete)

    def _on_wake(self):
        self._pending = None
        self._reschedule()

    def _on_backoff_complete(self):
        self._pending = None
        self._counting = False
        self.backoff_remaining = 0
        self._begin_exchange()

    # Medium callbacks -------------------------------------------------
    def on_medium_busy(self):
        if self.phase == self._PHASE_CONTEND:
            self._reschedule()

    def on_medium_maybe_idle(self):
        if self.phase == self._PHASE_CONTEND:
            self._reschedule()

    # ------------------------------------------------------------------
    # Transmission
    # ------------------------------------------------------------------
    def _data_airtime(self, payload_bytes):
        air = self._air_data.get(payload_bytes)
        if air is None:
            air = frame_airtime_ns(DATA, payload_bytes, self.params,
                                   self.medium.params.bandwidth_bps)
            self._air_data[payload_bytes] = air
        return air

    def _begin_exchange(self):
        packet = self.head
        sifs = self.params.sifs_ns
        data_air = self._data_airtime(packet.segment.size_bytes)
        if packet.segment.size_bytes > self.params.rts_threshold_bytes:
            duration = 3 * sifs + self._air_cts + data_air + self._air_ack
            frame = Frame(RTS, self.node_id, packet.next_hop, 0, duration, packet)
            air = self._air_rts
        else:
            frame = Frame(DATA, self.node_id, packet.next_hop,
                          packet.segment.size_bytes, sifs + self._air_ack, packet)
            air = data_air
        self.phase = self._PHASE_TX
        if self.trace:
            self._t("TX_START", f"kind={frame.kind} dst={frame.dst} air={air}")
        self.medium.begin_transmission(self.node_id, frame, air)

    def _start_data(self):
        packet = self.head
        data_air = self._data_airtime(packet.segment.size_bytes)
        frame = Frame(DATA, self.node_id, packet.next_hop,
                      packet.segment.size_bytes,
                      self.params.sifs_ns + self._air_ack, packet)
        self.phase = self._PHASE_TX
        if self.trace:
            self._t("TX_START", f"kind=DATA dst={frame.dst} air={data_air}")
        self.medium.begin_transmission(self.node_id, frame, data_air)

    def _start_response(self, frame, air):
        self._resp_pending = None
        if self.trace:
            self._t("TX_START", f"kind={frame.kind} dst={frame.dst} air={air}")
        self.medium.begin_transmission(self.node_id, frame, air)

    def on_own_tx_end(self, frame):
        """Sender-side end of an on-air frame; arms the matching timeout."""
        kind = frame.kind
        if kind == CTS or kind == ACK:
            return  # responses carry no sender-side state
        sifs = self.params.sifs_ns
        if kind == RTS:
            self.phase = self._PHASE_WAIT_CTS
            self._timeout = self.engine.schedule_in(
                sifs + self._air_cts + self._guard, self._on_cts_timeout)
        else:
            self.phase = self._PHASE_WAIT_ACK
            self._timeout = self.engine.schedule_in(
                sifs + self._air_ack + self._guard, self._on_ack_timeout)

    # ------------------------------------------------------------------
    # Timeouts, success, failure
    # ------------------------------------------------------------------
    def _on_cts_timeout(self):
        self._timeout = None
        if self.trace:
            self._t("CTS_TIMEOUT", "")
        self._fail(RTS)

    def _on_ack_timeout(self):
        self._timeout = None
        if self.trace:
            self._t("ACK_TIMEOUT", "")
        self._fail(DATA)

    def _fail(self, stage):
        packet = self.head
        verdict = self.counters.note_failure(stage)
        if verdict == "drop":
            # RTS-stage exhaustion is the classic retry-limit discard; a
            # DATA-stage exhaustion means the payload frames themselves
            # kept getting destroyed at the receiver, so it is attributed
            # to collisions. If the receiver actually took the data and
            # only the MAC ACKs were lost, the packet lives on downstream
            # and no terminal drop is recorded.
            if not packet.accepted_downstream:
                reason = DROP_RETRY if stage == RTS else DROP_COLLISION
                if self.trace:
                    self._t("DROP", f"reason={reason}")
                self.host.record_drop(packet, reason)
            elif self.trace:
                self._t("DROP", "reason=stale-copy")
            self._advance_queue()
        else:
            self._enter_backoff()

    def _on_success(self):
        self.counters.note_success()
        if self.trace:
            self._t("SUCCESS", "")
        self._advance_queue()

    def _advance_queue(self):
        """Move to the next queued packet. Its channel access begins a
        DIFS after the exchange that just ended; if the medium stays idle
        through that DIFS the packet goes out immediately, otherwise it
        contends with a fresh backoff."""
        self.head = None
        if self.queue:
            self.head = self.queue.popleft()
            self.phase = self._PHASE_NEXT_WAIT
            self.engine.schedule_in(self.params.difs_ns, self._deferred_access)
        else:
            self.phase = self._PHASE_IDLE

    def _deferred_access(self):
        if self.phase == self._PHASE_NEXT_WAIT:
            self._try_access_fresh()

    # ------------------------------------------------------------------
    # Reception
    # ------------------------------------------------------------------
    def on_frame_decoded(self, frame):
        now = self.engine.now
        if frame.dst != self.node_id:
            # Virtual carrier sense from any overheard frame.
            if frame.duration_ns > 0:
                until = now + frame.duration_ns
                if until > self.nav_until:
                    self.nav_until = until
                    if self.phase == self._PHASE_CONTEND:
                        self._reschedule()
            return
        kind = frame.kind
        if self.trace:
            self._t("RX", f"kind={kind} src={frame.src}")
        sifs = self.params.sifs_ns
        if kind == RTS:
            # Respond only when the NAV shows idle and no exchange of our
            # own is in progress; a silent receiver costs the sender one
            # short-retry attempt.
            if self.nav_until > now:
                return
            if self.phase not in (self._PHASE_IDLE, self._PHASE_CONTEND,
                                  self._PHASE_NEXT_WAIT):
                return
            if self._resp_pending is not None:
                return
            cts = Frame(CTS, self.node_id, frame.src, 0,
                        frame.duration_ns - sifs - self._air_cts)
            self._resp_pending = self.engine.schedule_in(
                sifs, self._start_response, cts, self._air_cts)
        elif kind == CTS:
            if (self.phase == self._PHASE_WAIT_CTS
                    and frame.src == self.head.next_hop):
                self._timeout.cancel()
                self._timeout = None
                # The RTS stage succeeded, so its failure run is over.
                self.counters.short_retry = 0
                self.phase = self._PHASE_DATA_GAP
                self.engine.schedule_in(sifs, self._start_data)
        elif kind == DATA:
            # ACK goes out unconditionally a SIFS later.
            if self._resp_pending is None:
                ack = Frame(ACK, self.node_id, frame.src, 0, 0)
                self._resp_pending = self.engine.schedule_in(
                    sifs, self._start_response, ack, self._air_ack)
            packet = frame.packet
            if self._dedup.get(frame.src) != packet.hop_id:
                self._dedup[frame.src] = packet.hop_id
                packet.accepted_downstream = True
                self.host.accept_segment(packet.segment)
        elif kind == ACK:
            if (self.phase == self._PHASE_WAIT_ACK
                    and frame.src == self.head.next_hop):
                self._timeout.cancel()
                self._timeout = None
                self._on_success()

    def on_frame_destroyed(self, frame):
        """A frame above the receive threshold lost to overlap (no capture)."""
        if self.trace and frame.dst == self.node_id:
            self._t("RX_COLLISION", f"kind={frame.kind} src={frame.src}")

    # ------------------------------------------------------------------
    def _t(self, event, extra):
        c = self.counters
        line = (f"t={self.engine.now} n={self.name} ev={event}"
                f" cw={c.cw} sr={c.short_retry} lr={c.long_retry}")
        if extra:
            line = f"{line} {extra}"
        self.trace.emit(line)
