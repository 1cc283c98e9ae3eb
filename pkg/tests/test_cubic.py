"""Congestion-control state machine: fixed-point knobs, curve placement,
loss rules, and growth behavior."""

import math

import pytest
from hypothesis import given, strategies as st

from tunerlab import cubic


def params(alpha_q=512, beta_q=717, fc=False, tf=False):
    return cubic.decode_params(alpha_q, beta_q, fc, tf)


# -- fixed-point knobs --------------------------------------------------------


def test_default_knobs():
    p = cubic.default_params()
    assert p.alpha == 1.0
    assert p.beta == pytest.approx(0.7, abs=0.001)
    assert p.fast_convergence and p.tcp_friendliness


def test_alpha_beta_scaling():
    p = params(alpha_q=1024, beta_q=512)
    assert p.alpha == 2.0
    assert p.beta == 0.5


@pytest.mark.parametrize("bad", [0, 1025, -1, 10_000])
def test_q_range_rejected(bad):
    with pytest.raises(ValueError):
        params(alpha_q=bad)
    with pytest.raises(ValueError):
        params(beta_q=bad)


def test_q_must_be_integer():
    with pytest.raises(ValueError):
        params(alpha_q=512.0)
    with pytest.raises(ValueError):
        params(beta_q=True)


@given(a=st.integers(1, 1024), b=st.integers(1, 1024))
def test_fixed_point_round_trip(a, b):
    p = cubic.decode_params(a, b, True, False)
    assert cubic.encode_params(p) == (a, b, True, False)


def test_init_state():
    s = cubic.init_state(10)
    assert s.cwnd == 10.0
    assert s.ssthresh == math.inf
    assert s.epoch_start is None
    with pytest.raises(ValueError):
        cubic.init_state(1)


# -- curve placement ----------------------------------------------------------


def test_epoch_k_from_plateau_gap():
    # last_max 100, cwnd 70, C 0.4: K = cbrt(75) = 4.217163...
    s = cubic.CubicState(
        cwnd=70.0, ssthresh=70.0, last_max=100.0, epoch_start=None,
        origin_point=0.0, k_seconds=0.0, tcp_cwnd=0.0, ack_cnt=0,
        min_rtt=math.inf,
    )
    s = cubic.epoch_begin(s, params(), now_s=5.0)
    assert s.k_seconds == pytest.approx(4.217163326508746, rel=1e-12)
    assert s.origin_point == 100.0
    assert s.epoch_start == 5.0
    # curve passes through the current window at t=0 and the plateau at t=K
    assert cubic.cubic_target(s, params(), 0.0) == pytest.approx(70.0, rel=1e-9)
    assert cubic.cubic_target(s, params(), s.k_seconds) == pytest.approx(100.0)


def test_epoch_convex_probe_when_at_or_above_plateau():
    s = cubic.CubicState(
        cwnd=120.0, ssthresh=100.0, last_max=100.0, epoch_start=None,
        origin_point=0.0, k_seconds=0.0, tcp_cwnd=0.0, ack_cnt=0,
        min_rtt=math.inf,
    )
    s = cubic.epoch_begin(s, params(), now_s=0.0)
    assert s.k_seconds == 0.0
    assert s.origin_point == 120.0


@given(
    origin=st.floats(2.0, 1000.0),
    k=st.floats(0.0, 50.0),
    c=st.floats(0.01, 10.0),
    t=st.floats(0.0, 100.0),
)
def test_signed_cube_matches_branch_form(origin, k, c, t):
    s = cubic.CubicState(
        cwnd=origin, ssthresh=origin, last_max=origin, epoch_start=0.0,
        origin_point=origin, k_seconds=k, tcp_cwnd=0.0, ack_cnt=0,
        min_rtt=math.inf,
    )
    p = cubic.CubicParams(512, 717, False, False, c_scale=c)
    got = cubic.cubic_target(s, p, t)
    if t < k:
        expect = origin - c * abs(t - k) ** 3
    else:
        expect = origin + c * abs(t - k) ** 3
    assert got == pytest.approx(expect, rel=1e-12, abs=1e-12)


# -- loss rules ---------------------------------------------------------------


def state_with_cwnd(cwnd, last_max=0.0):
    return cubic.CubicState(
        cwnd=cwnd, ssthresh=math.inf, last_max=last_max, epoch_start=1.0,
        origin_point=0.0, k_seconds=0.0, tcp_cwnd=0.0, ack_cnt=0,
        min_rtt=0.08,
    )


def test_loss_cuts_by_beta():
    s = cubic.on_loss(state_with_cwnd(100.0), params(beta_q=717))
    assert s.cwnd == 100.0 * (717 / 1024)
    assert s.cwnd == pytest.approx(70.0, abs=0.05)
    assert s.last_max == 100.0
    assert s.epoch_start is None


def test_loss_fast_convergence_scales_remembered_peak():
    s = cubic.on_loss(
        state_with_cwnd(100.0, last_max=120.0), params(beta_q=717, fc=True)
    )
    assert s.last_max == 100.0 * (1.0 + 717 / 1024) / 2.0
    assert s.last_max == pytest.approx(85.0, abs=0.05)
    assert s.cwnd == pytest.approx(70.0, abs=0.05)


def test_loss_beta_one_is_noop_on_cwnd():
    s = cubic.on_loss(state_with_cwnd(100.0), params(beta_q=1024))
    assert s.cwnd == 100.0
    assert s.last_max == 100.0


def test_loss_alpha_two_doubles_plateau():
    s = cubic.on_loss(state_with_cwnd(100.0), params(alpha_q=1024, beta_q=717))
    assert s.last_max == 200.0
    assert s.cwnd == pytest.approx(70.0, abs=0.05)


def test_loss_floor_two_segments():
    s = cubic.on_loss(state_with_cwnd(2.0), params(beta_q=256))
    assert s.cwnd == 2.0


@given(
    cwnd=st.floats(2.0, 2000.0),
    beta_q=st.integers(1, 1024),
    alpha_q=st.integers(1, 1024),
    fc=st.booleans(),
)
def test_loss_never_below_floor(cwnd, beta_q, alpha_q, fc):
    s = cubic.on_loss(
        state_with_cwnd(cwnd, last_max=cwnd * 2), params(alpha_q, beta_q, fc=fc)
    )
    assert s.cwnd >= 2.0
    assert s.ssthresh == s.cwnd


@given(cwnd=st.floats(2.0, 2000.0))
def test_beta_one_neutrality(cwnd):
    s = cubic.on_loss(state_with_cwnd(cwnd), params(beta_q=1024))
    assert s.cwnd == cwnd


# -- growth -------------------------------------------------------------------


def test_slow_start_adds_one_per_ack():
    s = cubic.init_state(10)
    s = cubic.on_ack(s, params(), now_s=0.1, rtt_sample_s=0.08)
    assert s.cwnd == 11.0


def test_rejects_nonpositive_rtt_sample():
    with pytest.raises(ValueError):
        cubic.on_ack(cubic.init_state(10), params(), 0.1, 0.0)


@given(
    data=st.lists(st.floats(0.01, 0.5), min_size=1, max_size=50),
    beta_q=st.integers(1, 1024),
)
def test_acks_never_shrink_window(data, beta_q):
    p = params(beta_q=beta_q, fc=True, tf=True)
    s = cubic.on_loss(state_with_cwnd(40.0, last_max=60.0), p)
    now = 1.0
    for rtt in data:
        now += rtt
        prev = s.cwnd
        s = cubic.on_ack(s, p, now, rtt)
        assert s.cwnd >= prev


def test_slow_probe_increment_at_target():
    # At the curve origin (K=0 probe, t=0) the increment is 1/(100 w) exactly.
    p = params()
    s = cubic.CubicState(
        cwnd=100.0, ssthresh=50.0, last_max=50.0, epoch_start=None,
        origin_point=0.0, k_seconds=0.0, tcp_cwnd=0.0, ack_cnt=0,
        min_rtt=math.inf,
    )
    s = cubic.on_ack(s, p, now_s=3.0, rtt_sample_s=None)
    assert s.cwnd == pytest.approx(100.0 + 1.0 / (100.0 * 100.0), rel=1e-12)


def test_friendly_slope_values():
    assert cubic._friendly_slope(params(beta_q=717)) == pytest.approx(0.529, abs=0.002)
    assert cubic._friendly_slope(params(beta_q=512)) == pytest.approx(1.0)
    assert cubic._friendly_slope(params(beta_q=1024)) == 0.0


def test_friendly_floor_constant_at_beta_one():
    p = params(beta_q=1024, tf=True)
    s = cubic.on_loss(state_with_cwnd(50.0), p)
    s = cubic.on_ack(s, p, 1.0, 0.08)
    start_floor = s.tcp_cwnd
    for i in range(20):
        s = cubic.on_ack(s, p, 1.1 + i * 0.08, 0.08)
    assert s.tcp_cwnd == start_floor
