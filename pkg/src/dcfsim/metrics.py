"""End-to-end accounting of transport data packets.

Every transport emission of a DATA segment is one tracked copy entering
the network. A copy has exactly one terminal outcome: delivered at the
destination, dropped somewhere (with a cause), or still in the network
when the run ends. Conservation over copies is checked exactly at the end
of every run; a second terminal outcome for the same copy is a simulator
bug and raises immediately.

Delay is measured on the first successful end-to-end delivery of each
transport packet; end-to-end retransmissions inherit the original send
time of that sequence number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .mac import DROP_COLLISION, DROP_NOROUTE, DROP_QUEUE, DROP_RETRY


class AccountingError(RuntimeError):
    """Internal conservation or double-outcome violation (fatal)."""


class CopyToken:
    """Identity of one tracked copy of a transport data packet."""

    __slots__ = ("copy_id", "flow_id", "seq", "sent_at", "outcome")

    def __init__(self, copy_id, flow_id, seq, sent_at):
        self.copy_id = copy_id
        self.flow_id = flow_id
        self.seq = seq
        self.sent_at = sent_at
        self.outcome = None


@dataclass
class DropRecord:
    flow_id: int
    seq: int
    copy_id: int
    time_ns: int
    reason: str
    node: int


@dataclass
class MetricsReport:
    """The per-run results row."""

    sent: int = 0
    delivered: int = 0
    avg_delay_s: float = 0.0
    total_dropped: int = 0
    mac_dropped: int = 0
    collision_dropped: int = 0
    retry_dropped: int = 0
    queue_dropped: int = 0
    noroute_dropped: int = 0
    in_flight_at_end: int = 0
    avg_delay_defined: bool = True
    per_flow_delivered: dict = field(default_factory=dict)

    # Metric columns in their fixed CSV order (parameters come first and
    # are supplied by the harness).
    CSV_FIELDS = ("sent", "delivered", "avg_delay_s", "total_dropped",
                  "mac_dropped", "collision_dropped", "retry_dropped",
                  "queue_dropped", "in_flight_at_end")

    def csv_values(self):
        return [getattr(self, name) for name in self.CSV_FIELDS]


class MetricsCollector:
    def __init__(self):
        self._next_copy_id = 0
        self.sent = 0
        self.delivered = 0
        self.drops = {DROP_COLLISION: 0, DROP_RETRY: 0, DROP_QUEUE: 0,
                      DROP_NOROUTE: 0}
        self.drop_records = []
        self.delay_sum_ns = 0
        self._first_sent = {}       # (flow, seq) -> first emission time
        self._delivered_seqs = set()
        self.per_flow_delivered = {}

    # ------------------------------------------------------------------
    def record_send(self, flow_id, seq, now) -> CopyToken:
        copy = CopyToken(self._next_copy_id, flow_id, seq, now)
        self._next_copy_id += 1
        self.sent += 1
        self._first_sent.setdefault((flow_id, seq), now)
        return copy

    def record_delivered(self, copy: CopyToken, now):
        self._terminal(copy, "delivered")
        self.delivered += 1
        self.per_flow_delivered[copy.flow_id] = (
            self.per_flow_delivered.get(copy.flow_id, 0) + 1)
        key = (copy.flow_id, copy.seq)
        if key not in self._delivered_seqs:
            self._delivered_seqs.add(key)
            self.delay_sum_ns += now - self._first_sent[key]

    def record_drop(self, copy: CopyToken, reason, node, now):
        self._terminal(copy, reason)
        self.drops[reason] += 1
        self.drop_records.append(
            DropRecord(copy.flow_id, copy.seq, copy.copy_id, now, reason, node))

    def _terminal(self, copy, outcome):
        if copy.outcome is not None:
            raise AccountingError(
                f"copy {copy.copy_id} (flow {copy.flow_id} seq {copy.seq}) "
                f"already terminal as {copy.outcome}, now {outcome}")
        copy.outcome = outcome

    # ------------------------------------------------------------------
    def finalize(self, in_network_audit=None) -> MetricsReport:
        """Close the books; optionally check the computed in-flight count
        against an independent walk of the network's queues."""
        total_dropped = sum(self.drops.values())
        in_flight = self.sent - self.delivered - total_dropped
        if in_flight < 0:
            raise AccountingError(
                f"negative in-flight count: sent={self.sent} "
                f"delivered={self.delivered} dropped={total_dropped}")
        if in_network_audit is not None and in_network_audit != in_flight:
            raise AccountingError(
                f"conservation violated: ledger in-flight {in_flight} != "
                f"{in_network_audit} copies found in the network")
        report = MetricsReport(
            sent=self.sent,
            delivered=self.delivered,
            total_dropped=total_dropped,
            mac_dropped=self.drops[DROP_COLLISION] + self.drops[DROP_RETRY],
            collision_dropped=self.drops[DROP_COLLISION],
            retry_dropped=self.drops[DROP_RETRY],
            queue_dropped=self.drops[DROP_QUEUE],
            noroute_dropped=self.drops[DROP_NOROUTE],
            in_flight_at_end=in_flight,
            per_flow_delivered=dict(self.per_flow_delivered),
        )
        if self.delivered > 0:
            report.avg_delay_s = self.delay_sum_ns / self.delivered / 1e9
        else:
            report.avg_delay_defined = False
        return report
