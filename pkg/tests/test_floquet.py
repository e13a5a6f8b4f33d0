"""Bessel evaluation and harmonic weight tables.

Oracle: an independent ascending power series
J_n(x) = sum_m (-1)^m (x/2)^(n+2m) / (m! (n+m)!), summed to machine
precision with exact integer factorials.  It shares no code with the
implementation (which switches to a downward recurrence above x = 1) and
is accurate to ~1e-9 relative over the supported domain; frozen anchor
values below were cross-checked against scipy.special.jv once and pasted
as literals.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from vheat import CustomModulation, SinusoidalModulation, bessel_jq, modulation_weights

from conftest import make_rng


def bessel_series(n: int, x: float) -> float:
    total, m = 0.0, 0
    while True:
        term = (-1.0) ** m * (0.5 * x) ** (n + 2 * m) / (
            math.factorial(m) * math.factorial(n + m)
        )
        total += term
        if abs(term) < 1e-18 * max(1.0, abs(total)) and m > n:
            return total
        m += 1


# frozen anchors: (order, argument, value)
BESSEL_ANCHORS = [
    (0, 0.5, 0.938469807240813),
    (1, 0.5, 0.2422684576748739),
    (2, 0.5, 0.030604023458682638),
    (0, 5.0, -0.17759677131433835),
    (3, 12.5, 0.11000813631434929),
    (7, 19.0, -0.11647797453873998),
]

# frozen sinusoidal weights at lambda = 0.5 (series-normalized, q_max = 20
# keeps everything; q_max = 1 renormalizes over three harmonics)
WEIGHTS_HALF_QMAX1 = {0: 0.8823901284257036, 1: 0.0588049357871482}
WEIGHTS_HALF_QMAX20 = {0: 0.8807255791026086, 1: 0.058694005584162164,
                       2: 0.0009366062518595972, 3: 6.57271148514631e-06}


@pytest.mark.parametrize("n,x,expected", BESSEL_ANCHORS)
def test_bessel_frozen_anchors(n, x, expected):
    assert bessel_jq(n, x) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("seed", range(8))
def test_bessel_matches_series_oracle(seed):
    rng = make_rng(900 + seed)
    for _ in range(40):
        n = int(rng.integers(0, 30))
        x = float(rng.uniform(0.0, 20.0))
        # abs floor covers the oracle's own cancellation noise near Bessel
        # zeros at the top of the x range (max series term ~1e7 at x = 20)
        assert bessel_jq(n, x) == pytest.approx(
            bessel_series(n, x), rel=5e-9, abs=3e-9
        ), (n, x)


def test_bessel_negative_order_parity():
    for n in range(1, 12):
        for x in (0.3, 2.7, 11.0):
            assert bessel_jq(-n, x) == pytest.approx((-1.0) ** n * bessel_jq(n, x), rel=1e-13)


def test_bessel_zero_argument_is_kronecker():
    assert bessel_jq(0, 0.0) == 1.0
    for n in range(1, 6):
        assert bessel_jq(n, 0.0) == 0.0


def test_bessel_domain_checks():
    with pytest.raises(ValueError):
        bessel_jq(51, 1.0)
    with pytest.raises(ValueError):
        bessel_jq(0, -0.1)
    with pytest.raises(ValueError):
        bessel_jq(0, 20.5)


def test_bessel_normalization_identity():
    # J0^2 + 2 sum_k Jk^2 = 1, the invariant behind the weight tables
    for x in (0.5, 3.0, 9.5, 17.0):
        total = bessel_jq(0, x) ** 2 + 2.0 * sum(bessel_jq(k, x) ** 2 for k in range(1, 45))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_sinusoidal_weights_frozen_values():
    table = modulation_weights(SinusoidalModulation(lam=0.5, Omega=1.0, q_max=1))
    assert set(table.entries) == {-1, 0, 1}
    assert table.probability(0) == pytest.approx(WEIGHTS_HALF_QMAX1[0], rel=1e-13)
    assert table.probability(1) == pytest.approx(WEIGHTS_HALF_QMAX1[1], rel=1e-13)
    assert table.probability(-1) == table.probability(1)

    wide = modulation_weights(SinusoidalModulation(lam=0.5, Omega=1.0, q_max=20))
    for q, expected in WEIGHTS_HALF_QMAX20.items():
        assert wide.probability(q) == pytest.approx(expected, rel=1e-10, abs=1e-16)


@pytest.mark.parametrize("seed", range(6))
def test_sinusoidal_weights_sum_to_one_and_are_symmetric(seed):
    rng = make_rng(1700 + seed)
    lam = float(rng.uniform(0.0, 3.0))
    q_max = int(rng.integers(1, 30))
    table = modulation_weights(SinusoidalModulation(lam=lam, Omega=1.0, q_max=q_max))
    probs = dict(table.retained(eps=0.0))
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-14)
    for q in probs:
        assert probs[q] == probs[-q]
        assert abs(q) <= q_max


def test_sinusoidal_truncation_is_monotone_in_q_max():
    # growing the cap can only move weight off the retained carrier
    lam = 1.5
    p0 = [
        modulation_weights(SinusoidalModulation(lam=lam, Omega=1.0, q_max=q)).probability(0)
        for q in (1, 2, 4, 8, 16)
    ]
    assert all(a >= b - 1e-15 for a, b in zip(p0, p0[1:]))


def test_sinusoidal_auto_truncates_negligible_tail():
    # lambda = 0.5's weight beyond |q| = 6 is below 1e-12, so a huge cap
    # must not drag in dozens of numerically empty harmonics
    table = modulation_weights(SinusoidalModulation(lam=0.5, Omega=1.0, q_max=50))
    assert table.q_max <= 8


def test_zero_depth_is_unmodulated():
    table = modulation_weights(SinusoidalModulation(lam=0.0, Omega=1.0, q_max=20))
    assert dict(table.retained()) == {0: 1.0}


def test_custom_weights_renormalize_after_truncation():
    mod = CustomModulation(weights={0: 2.0, 1: 1.0, 5: 1.0}, Omega=1.0, q_max=2)
    table = modulation_weights(mod)
    assert set(table.entries) == {0, 1}
    assert table.probability(0) == pytest.approx(2.0 / 3.0)
    assert table.probability(1) == pytest.approx(1.0 / 3.0)


def test_custom_weights_reject_bad_input():
    with pytest.raises(ValueError):
        modulation_weights(CustomModulation(weights={0: -0.5, 1: 1.5}, Omega=1.0, q_max=2))
    with pytest.raises(ValueError):
        modulation_weights(CustomModulation(weights={5: 1.0}, Omega=1.0, q_max=2))
    with pytest.raises(ValueError):
        modulation_weights(CustomModulation(weights={}, Omega=1.0, q_max=2))
