"""Propagation model, thresholds, and capture resolution."""

import math

import pytest

from dcfsim import (InvalidGeometryError, RadioParams, capture_outcome,
                    crossover_distance_m, propagation_delay_ns,
                    received_power)
from dcfsim.radio import BELOW_THRESHOLD, COLLISION, DECODED

P = RadioParams()


def friis(d, p):
    lam = p.wavelength_m
    return p.tx_power_w * lam * lam / ((4 * math.pi * d) ** 2)


def two_ray(d, p):
    h = p.antenna_height_m
    return p.tx_power_w * h ** 4 / d ** 4


def test_adjacent_spacing_decodes():
    # Brute-force oracle: 200 m is beyond the crossover, so the two-ray
    # formula applies; the result must clear the receive threshold.
    assert crossover_distance_m(P) < 200.0
    expected = two_ray(200.0, P)
    got = received_power(200.0, P)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got >= P.receive_threshold_w


def test_two_hop_distance_does_not_decode_but_is_sensed():
    p400 = received_power(400.0, P)
    assert p400 < P.receive_threshold_w
    assert p400 >= P.carrier_sense_threshold_w


def test_three_hop_distance_is_not_even_sensed():
    assert received_power(600.0, P) < P.carrier_sense_threshold_w


def test_power_monotone_in_distance():
    assert received_power(200.0, P) > received_power(400.0, P)
    samples = [received_power(d, P) for d in (10, 50, 86, 90, 150, 300, 900)]
    assert all(a >= b for a, b in zip(samples, samples[1:]))


def test_friis_and_two_ray_agree_at_crossover():
    dc = crossover_distance_m(P)
    assert friis(dc, P) == pytest.approx(two_ray(dc, P), rel=1e-9)
    # received_power switches model exactly there without a jump
    just_below = received_power(dc * (1 - 1e-9), P)
    just_above = received_power(dc * (1 + 1e-9), P)
    assert just_below == pytest.approx(just_above, rel=1e-6)


def test_non_positive_distance_rejected():
    with pytest.raises(InvalidGeometryError):
        received_power(0.0, P)
    with pytest.raises(InvalidGeometryError):
        received_power(-5.0, P)


def test_propagation_delay_rounds_to_nanoseconds():
    assert propagation_delay_ns(200.0) == 667
    assert propagation_delay_ns(400.0) == 1334


def test_threshold_ordering_enforced():
    with pytest.raises(ValueError):
        RadioParams(carrier_sense_threshold_w=1e-9, receive_threshold_w=1e-10)


def test_capture_lone_frame_decodes():
    assert capture_outcome(P.receive_threshold_w, [], P) == DECODED


def test_capture_equal_power_both_fail():
    power = 10 * P.receive_threshold_w
    assert capture_outcome(power, [power], P) == COLLISION


def test_capture_twenty_db_margin_wins():
    weak = 10 * P.receive_threshold_w
    strong = weak * 100.0  # 20 dB above
    assert capture_outcome(strong, [weak], P) == DECODED
    assert capture_outcome(weak, [strong], P) == COLLISION


def test_capture_exact_threshold_decodes():
    weak = 10 * P.receive_threshold_w
    assert capture_outcome(weak * P.capture_ratio, [weak], P) == DECODED


def test_below_receive_threshold_is_noise_only():
    assert capture_outcome(P.receive_threshold_w * 0.99, [], P) == BELOW_THRESHOLD


def test_capture_checks_strongest_single_interferer():
    power = 100 * P.receive_threshold_w
    others = [power / 20, power / 15, power / 12]
    assert capture_outcome(power, others, P) == DECODED
    others.append(power / 5)
    assert capture_outcome(power, others, P) == COLLISION
