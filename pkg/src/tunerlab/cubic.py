"""Tunable CUBIC congestion control, pure state-machine form.

All functions are value-in/value-out over immutable state; the transport
layer drives them through ``on_ack`` / ``on_loss``. Window units are MSS
segments, time is seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

ALPHA_DENOM = 512
BETA_DENOM = 1024
Q_MIN = 1
Q_MAX = 1024

DEFAULT_C = 0.4  # segments / s^3
MIN_CWND = 2.0

# Default knob positions: alpha=1.0, beta=0.7, both toggles on.
DEFAULT_ALPHA_Q512 = 512
DEFAULT_BETA_Q1024 = 717


@dataclass(frozen=True, slots=True)
class CubicParams:
    alpha_q512: int
    beta_q1024: int
    fast_convergence: bool
    tcp_friendliness: bool
    c_scale: float = DEFAULT_C

    def __post_init__(self):
        _check_q("alpha", self.alpha_q512)
        _check_q("beta", self.beta_q1024)
        if self.c_scale <= 0:
            raise ValueError(f"c_scale must be positive, got {self.c_scale}")

    @property
    def alpha(self) -> float:
        return self.alpha_q512 / ALPHA_DENOM

    @property
    def beta(self) -> float:
        return self.beta_q1024 / BETA_DENOM

    def to_wire(self) -> dict:
        """Serialized form using the runtime parameter-file names."""
        return {
            "alpha": self.alpha_q512,
            "beta": self.beta_q1024,
            "fast_convergence": int(self.fast_convergence),
            "tcp_friendliness": int(self.tcp_friendliness),
        }


def _check_q(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if not Q_MIN <= value <= Q_MAX:
        raise ValueError(f"{name} out of range: {value} (valid {Q_MIN}..{Q_MAX})")


def decode_params(
    alpha_q512: int,
    beta_q1024: int,
    fast_convergence: bool,
    tcp_friendliness: bool,
) -> CubicParams:
    """Build params from the fixed-point slider integers (alpha/512, beta/1024)."""
    return CubicParams(
        alpha_q512=alpha_q512,
        beta_q1024=beta_q1024,
        fast_convergence=fast_convergence,
        tcp_friendliness=tcp_friendliness,
    )


def encode_params(params: CubicParams) -> tuple[int, int, bool, bool]:
    return (
        params.alpha_q512,
        params.beta_q1024,
        params.fast_convergence,
        params.tcp_friendliness,
    )


def default_params() -> CubicParams:
    return decode_params(DEFAULT_ALPHA_Q512, DEFAULT_BETA_Q1024, True, True)


@dataclass(frozen=True, slots=True)
class CubicState:
    cwnd: float
    ssthresh: float
    last_max: float
    epoch_start: Optional[float]
    origin_point: float
    k_seconds: float
    tcp_cwnd: float
    ack_cnt: int
    min_rtt: float


def init_state(initcwnd: float) -> CubicState:
    if initcwnd < MIN_CWND:
        raise ValueError(f"initcwnd must be >= {MIN_CWND}, got {initcwnd}")
    return CubicState(
        cwnd=float(initcwnd),
        ssthresh=math.inf,
        last_max=0.0,
        epoch_start=None,
        origin_point=0.0,
        k_seconds=0.0,
        tcp_cwnd=0.0,
        ack_cnt=0,
        min_rtt=math.inf,
    )


def cubic_target(state: CubicState, params: CubicParams, elapsed_s: float) -> float:
    """Window target at `elapsed_s` since the epoch began: origin + C*(t-K)^3.

    The signed cube is identical to the branch-plus-absolute-value form some
    implementations use; there is deliberately only this one evaluation path.
    """
    dt = elapsed_s - state.k_seconds
    return state.origin_point + params.c_scale * dt * dt * dt


def epoch_begin(state: CubicState, params: CubicParams, now_s: float) -> CubicState:
    """Start a growth epoch on the first congestion-avoidance ACK after a loss.

    When the window sits below the last recorded maximum, the curve plateaus
    at that maximum and K places the inflection so the curve passes through
    the current window at t=0. Otherwise we probe convexly from here (K=0).
    """
    if state.cwnd < state.last_max:
        origin = state.last_max
        k = ((state.last_max - state.cwnd) / params.c_scale) ** (1.0 / 3.0)
    else:
        origin = state.cwnd
        k = 0.0
    return replace(
        state,
        epoch_start=now_s,
        origin_point=origin,
        k_seconds=k,
        ack_cnt=1,
        tcp_cwnd=state.cwnd,
    )


def friendly_floor(state: CubicState, params: CubicParams) -> float:
    """Standard-TCP window estimate used as a floor on the cubic target."""
    return state.tcp_cwnd


def _friendly_slope(params: CubicParams) -> float:
    # AIMD-equivalence slope: segments per RTT of an equally aggressive
    # additive-increase flow with the same multiplicative decrease.
    b = params.beta
    return 3.0 * (1.0 - b) / (1.0 + b)


def on_ack(
    state: CubicState,
    params: CubicParams,
    now_s: float,
    rtt_sample_s: Optional[float],
) -> CubicState:
    """Advance the window for one in-order ACK.

    `rtt_sample_s` may be None when the transport has no valid timing for
    this ACK (retransmission ambiguity); the min-RTT filter is then left
    untouched.
    """
    if rtt_sample_s is not None:
        if rtt_sample_s <= 0:
            raise ValueError(f"rtt sample must be positive, got {rtt_sample_s}")
        min_rtt = min(state.min_rtt, rtt_sample_s)
    else:
        min_rtt = state.min_rtt

    if state.cwnd < state.ssthresh:
        return replace(state, cwnd=state.cwnd + 1.0, min_rtt=min_rtt)

    if state.epoch_start is None:
        state = epoch_begin(replace(state, min_rtt=min_rtt), params, now_s)
        established_now = True
    else:
        state = replace(state, min_rtt=min_rtt)
        established_now = False

    lookahead = state.min_rtt if math.isfinite(state.min_rtt) else 0.0
    t = (now_s - state.epoch_start) + lookahead
    target = cubic_target(state, params, t)

    tcp_cwnd = state.tcp_cwnd
    if params.tcp_friendliness:
        tcp_cwnd += _friendly_slope(params) / state.cwnd
        floor = tcp_cwnd
        if floor > target:
            target = floor

    if target > state.cwnd:
        cwnd = state.cwnd + (target - state.cwnd) / state.cwnd
    else:
        cwnd = state.cwnd + 1.0 / (100.0 * state.cwnd)

    ack_cnt = state.ack_cnt if established_now else state.ack_cnt + 1
    return replace(state, cwnd=cwnd, tcp_cwnd=tcp_cwnd, ack_cnt=ack_cnt)


def on_loss(state: CubicState, params: CubicParams) -> CubicState:
    """Record one loss event: remember the peak, cut the window, end the epoch.

    Fast convergence scales the remembered peak down first; the alpha knob
    multiplies it last, so the 85% figure stays exact at alpha=1.
    """
    w = state.cwnd
    if params.fast_convergence and w < state.last_max:
        base = w * (1.0 + params.beta) / 2.0
    else:
        base = w
    last_max = base * params.alpha
    ssthresh = max(w * params.beta, MIN_CWND)
    return replace(
        state,
        cwnd=ssthresh,
        ssthresh=ssthresh,
        last_max=last_max,
        epoch_start=None,
    )
