"""Deterministic discrete-event core: clock, scheduler, and seeded RNG."""

from __future__ import annotations

import heapq

import numpy as np

# Simulation time is integer nanoseconds. Every protocol constant (slot,
# SIFS, bit times at 2 Mbps, propagation delays) is an exact multiple, so
# slot arithmetic never drifts.
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000


class SchedulingError(RuntimeError):
    """An event was scheduled in the past (programming error, fatal)."""


class EventHandle:
    """Ticket for one scheduled event. Cancellation is lazy: the heap
    entry stays put but fires as a no-op."""

    __slots__ = ("fire_at", "seq", "fn", "args")

    def __init__(self, fire_at, seq, fn, args):
        self.fire_at = fire_at
        self.seq = seq
        self.fn = fn
        self.args = args

    def cancel(self):
        self.fn = None

    @property
    def cancelled(self):
        return self.fn is None


class EventScheduler:
    """Single-run event queue ordered by (fire_at, insertion seq).

    The insertion sequence breaks ties between simultaneous events, which
    is what makes simultaneous backoff expiries (and therefore collisions)
    reproducible run to run. Heap entries are (fire_at, seq, handle)
    tuples so ordering never leaves C code; seq is unique, so the handle
    itself is never compared.
    """

    def __init__(self):
        self.now = 0
        self._seq = 0
        self._heap = []

    def schedule_at(self, fire_at, fn, *args):
        if fire_at < self.now:
            raise SchedulingError(
                f"event at t={fire_at} ns scheduled when now={self.now} ns"
            )
        seq = self._seq
        self._seq = seq + 1
        handle = EventHandle(fire_at, seq, fn, args)
        heapq.heappush(self._heap, (fire_at, seq, handle))
        return handle

    def schedule_in(self, delay, fn, *args):
        return self.schedule_at(self.now + delay, fn, *args)

    def run_until(self, t_end):
        """Fire all events with fire_at <= t_end in (fire_at, seq) order.

        Returns the number of events that actually fired (cancelled
        entries are skipped). Leaves now == t_end.
        """
        fired = 0
        heap = self._heap
        pop = heapq.heappop
        while heap and heap[0][0] <= t_end:
            fire_at, _, handle = pop(heap)
            fn = handle.fn
            if fn is None:
                continue
            self.now = fire_at
            handle.fn = None
            fn(*handle.args)
            fired += 1
        self.now = t_end
        return fired


class Rng:
    """Seeded PCG64 stream. One stream per run, drawn in event order, so
    an identical seed replays the identical draw sequence."""

    def __init__(self, seed):
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform_int(self, upper):
        """Uniform integer in [0, upper], both endpoints included."""
        if upper < 0:
            raise ValueError("upper must be >= 0")
        return int(self._gen.integers(0, upper + 1))


class TraceLog:
    """Per-run MAC event log, one text line per event.

    Kept as plain strings so a replay with the same seed and config can be
    compared byte for byte.
    """

    def __init__(self):
        self.lines = []

    def emit(self, line):
        self.lines.append(line)

    def text(self):
        return "\n".join(self.lines) + ("\n" if self.lines else "")

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.text())
