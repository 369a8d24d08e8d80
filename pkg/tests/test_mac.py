"""DCF state machine: queueing, access timing, backoff freeze/resume,
window adaptation, retry exhaustion, and the four-way exchange."""

import pytest

from dcfsim import MacParams, Rng, frame_airtime_ns
from dcfsim.engine import MS, US
from dcfsim.mac import ACK, CTS, DATA, DROP_QUEUE, DROP_RETRY, RTS, MacCounters

from conftest import Cell, ScriptedRng

SLOT = 20 * US
DIFS = 50 * US
SIFS = 10 * US

AIR_RTS = frame_airtime_ns(RTS, 0, MacParams(), 2_000_000)
AIR_CTS = frame_airtime_ns(CTS, 0, MacParams(), 2_000_000)
AIR_ACK = frame_airtime_ns(ACK, 0, MacParams(), 2_000_000)
AIR_DATA_1500 = frame_airtime_ns(DATA, 1500, MacParams(), 2_000_000)

PD_200M = 667  # propagation over one 200 m hop, ns


def test_data_airtime_at_two_mbps():
    # (1500 + 34) bytes serialized at 2 Mbps plus the 192 us preamble
    assert AIR_DATA_1500 == 6_328 * US
    assert AIR_RTS == 272 * US
    assert AIR_CTS == AIR_ACK == 248 * US


def test_mac_params_validation():
    with pytest.raises(ValueError):
        MacParams(cw_min=30)              # not 2^k - 1
    with pytest.raises(ValueError):
        MacParams(cw_min=63, cw_max=31)   # min above max
    with pytest.raises(ValueError):
        MacParams(short_retry_limit=0)
    with pytest.raises(ValueError):
        MacParams(difs_ns=40 * US)        # breaks difs = sifs + 2 slots


# ----------------------------------------------------------------------
# Interface queue
# ----------------------------------------------------------------------

def test_queue_capacity_rule():
    cell = Cell([(0.0, 0.0), (200.0, 0.0)])
    mac = cell.macs[0]
    mac.enqueue(cell.packet(1))          # becomes head of line
    for _ in range(49):
        assert mac.enqueue(cell.packet(1))
    assert mac.queue_len == 49
    assert mac.enqueue(cell.packet(1))   # 50th waiting packet fits
    assert not mac.enqueue(cell.packet(1))  # queue at capacity
    assert mac.queue_len == 50
    assert cell.hosts[0].drops[-1][1] == DROP_QUEUE


# ----------------------------------------------------------------------
# Channel access
# ----------------------------------------------------------------------

def test_idle_channel_gives_immediate_access():
    cell = Cell([(0.0, 0.0), (200.0, 0.0)])
    cell.engine.schedule_at(100 * US, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(1 * MS)
    tx = cell.events("TX_START", "N0")
    assert tx[0]["t"] == 100 * US       # no backoff at all
    assert tx[0]["kind"] == "RTS"


def test_busy_channel_defers_to_backoff_after_difs():
    rng = ScriptedRng([3])
    cell = Cell([(0.0, 0.0), (200.0, 0.0)], rng=rng)
    cell.inject_noise(1, 0, 1 * MS)     # channel busy [pd, 1 ms + pd] at N0
    cell.engine.schedule_at(500 * US, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(5 * MS)
    tx = cell.events("TX_START", "N0")
    busy_end_at_n0 = 1 * MS + PD_200M
    assert tx[0]["t"] == busy_end_at_n0 + DIFS + 3 * SLOT


def test_backoff_freezes_and_resumes_with_remaining_slots():
    rng = ScriptedRng([5])
    cell = Cell([(0.0, 0.0), (200.0, 0.0)], rng=rng)
    cell.inject_noise(1, 0, 500 * US)
    cell.engine.schedule_at(100 * US, cell.macs[0].enqueue, cell.packet(1))
    # Counting starts at 500us + pd + DIFS; interrupt it mid third slot,
    # so exactly two slots are banked and three remain.
    count_start = 500 * US + PD_200M + DIFS
    cell.inject_noise(1, count_start + 2 * SLOT + 10 * US, 300 * US)
    cell.engine.run_until(5 * MS)
    tx = cell.events("TX_START", "N0")
    resume_start = (count_start + 2 * SLOT + 10 * US + 300 * US + PD_200M) + DIFS
    assert tx[0]["t"] == resume_start + 3 * SLOT


def test_backoff_draw_zero_transmits_at_difs_boundary():
    rng = ScriptedRng([0])
    cell = Cell([(0.0, 0.0), (200.0, 0.0)], rng=rng)
    cell.inject_noise(1, 0, 200 * US)
    cell.engine.schedule_at(50 * US, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(2 * MS)
    tx = cell.events("TX_START", "N0")
    assert tx[0]["t"] == 200 * US + PD_200M + DIFS


def test_backoff_draw_ten_waits_two_hundred_microseconds():
    rng = ScriptedRng([10])
    cell = Cell([(0.0, 0.0), (200.0, 0.0)], rng=rng)
    cell.inject_noise(1, 0, 200 * US)
    cell.engine.schedule_at(50 * US, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(3 * MS)
    tx = cell.events("TX_START", "N0")
    assert tx[0]["t"] - (200 * US + PD_200M + DIFS) == 200 * US


# ----------------------------------------------------------------------
# Four-way exchange
# ----------------------------------------------------------------------

def test_four_way_exchange_sequence_and_timing():
    cell = Cell([(0.0, 0.0), (200.0, 0.0)])
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(20 * MS)
    tx = cell.events("TX_START")
    kinds = [(r["n"], r["kind"]) for r in tx[:4]]
    assert kinds == [("N0", "RTS"), ("N1", "CTS"), ("N0", "DATA"), ("N1", "ACK")]
    t_rts, t_cts, t_data, t_ack = (r["t"] for r in tx[:4])
    assert t_cts == t_rts + AIR_RTS + PD_200M + SIFS
    assert t_data == t_cts + AIR_CTS + PD_200M + SIFS
    assert t_ack == t_data + AIR_DATA_1500 + PD_200M + SIFS
    assert cell.events("SUCCESS", "N0")
    # the payload was handed up exactly once
    assert len(cell.hosts[1].accepted) == 1


def test_rts_threshold_disables_handshake_for_small_frames():
    params = MacParams(rts_threshold_bytes=500)
    cell = Cell([(0.0, 0.0), (200.0, 0.0)], mac_params=params)
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1, size_bytes=40))
    cell.engine.run_until(5 * MS)
    kinds = [r["kind"] for r in cell.events("TX_START")]
    assert kinds[:2] == ["DATA", "ACK"]
    assert "RTS" not in kinds


def test_third_party_defers_on_nav_until_exchange_ends():
    # Chain N0 - N1 - N2: N2 decodes N1's CTS and must hold off for the
    # whole exchange even though it cannot hear N0 itself.
    rng = ScriptedRng([0])
    cell = Cell([(0.0, 0.0), (200.0, 0.0), (400.0, 0.0)], rng=rng)
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.schedule_at(1 * MS, cell.macs[2].enqueue, cell.packet(1))
    cell.engine.run_until(30 * MS)
    ack = [r for r in cell.events("TX_START", "N1") if r["kind"] == "ACK"]
    n2_tx = cell.events("TX_START", "N2")
    assert n2_tx[0]["t"] > ack[0]["t"] + AIR_ACK  # after the exchange closed


def test_smaller_draw_wins_and_loser_carries_residual():
    rng = ScriptedRng([1, 4])
    cell = Cell([(0.0, 0.0), (0.0, 200.0), (200.0, 0.0)], rng=rng)
    cell.inject_noise(2, 0, 300 * US)
    cell.engine.schedule_at(10 * US, cell.macs[0].enqueue, cell.packet(2))
    cell.engine.schedule_at(20 * US, cell.macs[1].enqueue, cell.packet(2))
    cell.engine.run_until(40 * MS)
    first_n0 = cell.events("TX_START", "N0")[0]
    first_n1 = cell.events("TX_START", "N1")[0]
    assert first_n0["t"] < first_n1["t"]
    assert first_n0["kind"] == "RTS"
    # N1 heard N0's RTS and captured nothing of its own in that round
    assert cell.events("RX_COLLISION") == []


def test_equal_draws_collide_at_receiver():
    rng = ScriptedRng([2, 2])
    cell = Cell([(0.0, 0.0), (0.0, 200.0), (200.0, 0.0)], rng=rng)
    cell.inject_noise(2, 0, 300 * US)
    cell.engine.schedule_at(10 * US, cell.macs[0].enqueue, cell.packet(2))
    cell.engine.schedule_at(20 * US, cell.macs[1].enqueue, cell.packet(2))
    cell.engine.run_until(2 * MS)
    t0 = cell.events("TX_START", "N0")[0]["t"]
    t1 = cell.events("TX_START", "N1")[0]["t"]
    assert abs(t0 - t1) < 2 * US          # same slot, sub-slot offset only
    destroyed = [r for r in cell.events("RX_COLLISION", "N2")]
    assert len(destroyed) == 2            # both RTS frames died at N2


# ----------------------------------------------------------------------
# Window adaptation and retry exhaustion
# ----------------------------------------------------------------------

def test_counters_success_resets_window_and_retries():
    c = MacCounters(MacParams())
    for _ in range(3):
        c.note_failure(RTS)
    c.note_failure(DATA)
    assert c.cw == 511 and c.short_retry == 3 and c.long_retry == 1
    c.note_success()
    assert (c.cw, c.short_retry, c.long_retry) == (31, 0, 0)


def test_counters_window_doubles_and_caps():
    c = MacCounters(MacParams())
    seen = [c.cw]
    for _ in range(6):
        c.note_failure(RTS if c.short_retry < 6 else DATA)
        seen.append(c.cw)
    assert seen == [31, 63, 127, 255, 511, 1023, 1023]


def test_counters_drop_on_short_retry_limit():
    params = MacParams(short_retry_limit=7)
    c = MacCounters(params)
    outcomes = [c.note_failure(RTS) for _ in range(7)]
    assert outcomes == ["retry"] * 6 + ["drop"]
    assert (c.cw, c.short_retry) == (31, 0)  # fresh window for next packet


def test_retry_exhaustion_drops_packet_and_moves_on():
    # N1 is NAV-blocked forever, so it never answers N0's RTS.
    cell = Cell([(0.0, 0.0), (200.0, 0.0)])
    cell.macs[1].nav_until = 10**12
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(300 * MS)
    timeouts = cell.events("CTS_TIMEOUT", "N0")
    assert len(timeouts) == 7
    # window doubled along the orbit before each retry
    assert [r["cw"] for r in timeouts] == [63, 127, 255, 511, 1023, 1023, 31]
    drops = cell.events("DROP", "N0")
    assert drops[0]["reason"] == DROP_RETRY
    assert cell.hosts[0].drops[0][1] == DROP_RETRY
    assert cell.macs[0].state == "IDLE"


def test_retry_counters_are_per_packet():
    cell = Cell([(0.0, 0.0), (200.0, 0.0)])
    cell.macs[1].nav_until = 10**12
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(300 * MS)
    cell.macs[1].nav_until = 0            # unblock the receiver
    cell.engine.schedule_at(cell.engine.now + 1 * MS,
                            cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(cell.engine.now + 50 * MS)
    assert len(cell.events("SUCCESS", "N0")) == 1
    assert len(cell.events("DROP", "N0")) == 1
    assert (cell.macs[0].counters.short_retry,
            cell.macs[0].counters.long_retry) == (0, 0)


def test_success_resets_window_after_failures():
    # Block the receiver for a while, then release it: the same packet
    # must get through and snap the window back to cw_min.
    cell = Cell([(0.0, 0.0), (200.0, 0.0)])
    cell.macs[1].nav_until = 3 * MS
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(100 * MS)
    assert cell.events("CTS_TIMEOUT", "N0")           # it did fail first
    assert cell.events("SUCCESS", "N0")
    assert cell.macs[0].counters.cw == 31


def test_next_packet_chains_after_difs_when_medium_stays_idle():
    cell = Cell([(0.0, 0.0), (200.0, 0.0)])
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.schedule_at(0, cell.macs[0].enqueue, cell.packet(1))
    cell.engine.run_until(50 * MS)
    tx = [r for r in cell.events("TX_START", "N0") if r["kind"] == "RTS"]
    assert len(tx) == 2
    ack_rx = cell.events("RX", "N0")[0]
    # second access begins one DIFS after the closing MAC ACK arrived
    assert tx[1]["t"] == ack_rx["t"] + DIFS
