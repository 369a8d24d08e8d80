"""Simplified TCP Reno sender/receiver with an always-backlogged FTP source.

Immediate cumulative ACKs (no delayed ACK), slow start / congestion
avoidance, fast retransmit on the third duplicate ACK with window halving
but no fast-recovery inflation, exponential RTO backoff with Jacobson
estimation, and a fixed receiver window.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import MS, SEC

SEG_DATA = "DATA"
SEG_ACK = "ACK"


@dataclass
class TcpParams:
    max_window: int = 20          # classic receiver-window cap, in segments
    initial_ssthresh: int = 20
    data_bytes: int = 1500
    ack_bytes: int = 40
    initial_rto_ns: int = 1 * SEC
    rto_min_ns: int = 200 * MS    # keeps MAC-level jitter from spurious timeouts
    rto_max_ns: int = 60 * SEC


class Segment:
    """One transport emission. Every emission is a distinct copy entering
    the network; metrics tracking rides along in `copy`.

    For ACK segments, seq carries the cumulative acknowledged value.
    """

    __slots__ = ("flow_id", "kind", "seq", "size_bytes", "src", "dst",
                 "sent_at", "copy")

    def __init__(self, flow_id, kind, seq, size_bytes, src, dst, sent_at, copy=None):
        self.flow_id = flow_id
        self.kind = kind
        self.seq = seq
        self.size_bytes = size_bytes
        self.src = src
        self.dst = dst
        self.sent_at = sent_at
        self.copy = copy


class TcpSender:
    """Reno sender for one flow; the FTP source always has data, so the
    send window is refilled whenever it opens."""

    def __init__(self, flow_id, src, dst, engine, host, metrics, params: TcpParams):
        self.flow_id = flow_id
        self.src = src
        self.dst = dst
        self.engine = engine
        self.host = host
        self.metrics = metrics
        self.params = params
        self.cwnd = 1.0
        self.ssthresh = params.initial_ssthresh
        self.next_seq = 1
        self.highest_acked = 0
        self.dupack_count = 0
        self.srtt = None
        self.rttvar = 0
        self.rto = params.initial_rto_ns
        self.timer = None
        self.send_times = {}       # seq -> first emission time
        self.retransmitted = set()  # seqs excluded from RTT sampling (Karn)
        self.cwnd_log = []         # (time, cwnd) after every new ACK
        self.started = False

    # ------------------------------------------------------------------
    def start(self):
        self.started = True
        self.ftp_tick()

    @property
    def window(self):
        w = self.cwnd
        if w > self.params.max_window:
            w = self.params.max_window
        return int(w)

    @property
    def in_flight(self):
        return self.next_seq - 1 - self.highest_acked

    def ftp_tick(self):
        """Keep the window full: emit new segments while there is room."""
        while self.in_flight < self.window:
            self._emit(self.next_seq, retransmit=False)
            self.next_seq += 1

    def _emit(self, seq, retransmit):
        now = self.engine.now
        copy = self.metrics.record_send(self.flow_id, seq, now)
        seg = Segment(self.flow_id, SEG_DATA, seq, self.params.data_bytes,
                      self.src, self.dst, now, copy)
        if retransmit:
            self.retransmitted.add(seq)
        else:
            self.send_times[seq] = now
        if self.timer is None:
            self.timer = self.engine.schedule_in(self.rto, self._on_timer)
        self.host.send_segment(seg)

    # ------------------------------------------------------------------
    def on_ack(self, ack_seq):
        if ack_seq > self.highest_acked:
            self._on_new_ack(ack_seq)
        elif ack_seq == self.highest_acked and self.in_flight > 0:
            self._on_dupack()
        # acks below the cumulative point are stale; nothing to do

    def _on_new_ack(self, ack_seq):
        if self.cwnd < self.ssthresh:
            self.cwnd += 1.0
        else:
            self.cwnd += 1.0 / self.cwnd
        if self.cwnd > self.params.max_window:
            self.cwnd = float(self.params.max_window)
        sent_at = self.send_times.get(ack_seq)
        if sent_at is not None and ack_seq not in self.retransmitted:
            self._rtt_sample(self.engine.now - sent_at)
        for seq in range(self.highest_acked + 1, ack_seq + 1):
            self.send_times.pop(seq, None)
            self.retransmitted.discard(seq)
        self.highest_acked = ack_seq
        self.dupack_count = 0
        self._restart_timer()
        self.cwnd_log.append((self.engine.now, self.cwnd))
        self.ftp_tick()

    def _on_dupack(self):
        self.dupack_count += 1
        if self.dupack_count == 3:
            # Fast retransmit with Reno halving, no inflation.
            half = int(self.cwnd) // 2
            self.ssthresh = half if half >= 2 else 2
            self.cwnd = float(self.ssthresh)
            self._emit(self.highest_acked + 1, retransmit=True)
            self._restart_timer()

    def _on_timer(self):
        self.timer = None
        if self.in_flight == 0:
            return
        half = int(self.cwnd) // 2
        self.ssthresh = half if half >= 2 else 2
        self.cwnd = 1.0
        self.rto = min(2 * self.rto, self.params.rto_max_ns)
        self.dupack_count = 0
        self._emit(self.highest_acked + 1, retransmit=True)
        self._restart_timer()

    def _restart_timer(self):
        if self.timer is not None:
            self.timer.cancel()
            self.timer = None
        if self.in_flight > 0:
            self.timer = self.engine.schedule_in(self.rto, self._on_timer)

    def _rtt_sample(self, sample_ns):
        """Jacobson/Karels estimator; rttvar updates against the old srtt."""
        if self.srtt is None:
            self.srtt = sample_ns
            self.rttvar = sample_ns / 2
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(sample_ns - self.srtt)
            self.srtt = 0.875 * self.srtt + 0.125 * sample_ns
        rto = self.srtt + 4 * self.rttvar
        if rto < self.params.rto_min_ns:
            rto = self.params.rto_min_ns
        elif rto > self.params.rto_max_ns:
            rto = self.params.rto_max_ns
        self.rto = int(rto)


class TcpReceiver:
    """Cumulative-ACK receiver; every arriving DATA segment is answered
    immediately, duplicates included."""

    def __init__(self, flow_id, src, dst, engine, host, metrics, params: TcpParams):
        self.flow_id = flow_id
        self.src = src            # sender's node (where ACKs go)
        self.dst = dst
        self.engine = engine
        self.host = host
        self.metrics = metrics
        self.params = params
        self.highest_inorder = 0
        self.buffer = set()

    def on_data(self, seg: Segment):
        now = self.engine.now
        self.metrics.record_delivered(seg.copy, now)
        seq = seg.seq
        if seq == self.highest_inorder + 1:
            self.highest_inorder = seq
            while self.highest_inorder + 1 in self.buffer:
                self.buffer.remove(self.highest_inorder + 1)
                self.highest_inorder += 1
        elif seq > self.highest_inorder:
            self.buffer.add(seq)
        ack = Segment(self.flow_id, SEG_ACK, self.highest_inorder,
                      self.params.ack_bytes, self.dst, self.src, now)
        self.host.send_segment(ack)
