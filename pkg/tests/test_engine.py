"""Event scheduler and RNG contracts."""

import numpy as np
import pytest
from scipy import stats

from dcfsim import EventScheduler, Rng, SchedulingError
from dcfsim.engine import SEC


def test_fire_order_time_then_insertion():
    eng = EventScheduler()
    fired = []
    eng.schedule_at(5, fired.append, "first-at-5")
    eng.schedule_at(3, fired.append, "at-3")
    eng.schedule_at(5, fired.append, "second-at-5")
    eng.run_until(10)
    assert fired == ["at-3", "first-at-5", "second-at-5"]


def test_event_at_now_fires_before_later_events():
    eng = EventScheduler()
    fired = []
    eng.schedule_at(7, fired.append, "later")
    eng.schedule_at(0, fired.append, "now")
    eng.run_until(10)
    assert fired == ["now", "later"]


def test_cancelled_event_never_fires():
    eng = EventScheduler()
    fired = []
    handle = eng.schedule_at(5, fired.append, "x")
    handle.cancel()
    assert handle.cancelled
    count = eng.run_until(10)
    assert fired == []
    assert count == 0


def test_scheduling_in_the_past_is_fatal():
    eng = EventScheduler()
    eng.schedule_at(5, lambda: None)
    eng.run_until(5)
    with pytest.raises(SchedulingError):
        eng.schedule_at(4, lambda: None)


def test_run_until_empty_queue_advances_clock():
    eng = EventScheduler()
    assert eng.run_until(200 * SEC) == 0
    assert eng.now == 200 * SEC


def test_run_until_respects_horizon():
    eng = EventScheduler()
    fired = []
    eng.schedule_at(100 * SEC, fired.append, 1)
    assert eng.run_until(50 * SEC) == 0
    assert fired == []
    assert eng.run_until(200 * SEC) == 1
    assert fired == [1]


def test_events_scheduled_while_running_fire_in_same_pass():
    eng = EventScheduler()
    fired = []

    def chain():
        fired.append("a")
        eng.schedule_at(eng.now, fired.append, "b")

    eng.schedule_at(5, chain)
    eng.run_until(5)
    assert fired == ["a", "b"]


# ----------------------------------------------------------------------
# RNG
# ----------------------------------------------------------------------

def test_uniform_int_single_point():
    rng = Rng(42)
    assert all(rng.uniform_int(0) == 0 for _ in range(10))


def test_uniform_int_same_seed_replays():
    a = Rng(12345)
    b = Rng(12345)
    assert [a.uniform_int(31) for _ in range(100)] == \
           [b.uniform_int(31) for _ in range(100)]


def test_uniform_int_chi_square_uniformity():
    rng = Rng(2024)
    draws = np.array([rng.uniform_int(31) for _ in range(100_000)])
    counts = np.bincount(draws, minlength=32)
    assert counts.sum() == 100_000
    _, p = stats.chisquare(counts)
    assert p > 0.01


def test_uniform_int_mean_matches_uniform():
    rng = Rng(7)
    draws = [rng.uniform_int(31) for _ in range(100_000)]
    mean = sum(draws) / len(draws)
    assert abs(mean - 15.5) <= 0.15


def test_uniform_int_stays_in_range_for_random_uppers():
    rng = Rng(99)
    pick = Rng(100)
    for _ in range(2000):
        upper = pick.uniform_int(4096)
        value = rng.uniform_int(upper)
        assert 0 <= value <= upper


def test_uniform_int_rejects_negative_upper():
    with pytest.raises(ValueError):
        Rng(1).uniform_int(-1)
