"""Closed-form sketch of the congestion window over time.

The model assumes a single greedy flow whose only losses come from
overflowing the bottleneck's tail-drop queue, with fast convergence and
the friendly floor disabled. It exists for chart overlay and as an
independent check on the simulator's steady-state sawtooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from . import cubic
from .cubic import CubicParams
from .netsim import LinkConfig, TELEMETRY_CSV_HEADER

SAMPLE_STEP_MS = 200  # 5 Hz, same cadence as simulator telemetry
EPOCH_CAP_FACTOR = 10.0
PREDICTED_FLOW_ID = "predicted"
FLAT_EPOCH_S = 1e-9


@dataclass(frozen=True, slots=True)
class PredictorModel:
    cubic_params: CubicParams
    link: LinkConfig
    mss: int = 1000
    duration_s: float = 60.0
    initcwnd: int = 10
    include_slow_start: bool = True

    def __post_init__(self):
        if self.mss <= 0:
            raise ValueError(f"mss must be positive, got {self.mss}")
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be positive, got {self.duration_s}")
        if self.initcwnd < cubic.MIN_CWND:
            raise ValueError(f"initcwnd must be >= {cubic.MIN_CWND}, got {self.initcwnd}")


@dataclass(slots=True)
class PredictedTrace:
    samples: list[tuple[float, float]]  # (t_s, cwnd_segments)
    peak_segments: float
    epoch_period_s: Optional[float]  # None when the window holds flat
    alpha_below_beta: bool
    truncated_epochs: int
    diagnostics: list[str]


def peak_window(link: LinkConfig, mss: int) -> float:
    """Window (segments) at which pipe plus queue overflow: BDP + queue."""
    if mss <= 0:
        raise ValueError(f"mss must be positive, got {mss}")
    bdp_bytes = link.rate_bps * (link.rtt_ms / 1000.0) / 8.0
    return (bdp_bytes + link.queue_bytes) / mss


def _epoch_shape(w_loss: float, params: CubicParams) -> tuple[float, float, float]:
    """Post-loss curve parameters: (w0, origin, K).

    Reuses the congestion-control module's own loss and epoch rules so the
    model can never disagree with the state machine about curve placement.
    """
    state = cubic.CubicState(
        cwnd=w_loss,
        ssthresh=math.inf,
        last_max=0.0,
        epoch_start=None,
        origin_point=0.0,
        k_seconds=0.0,
        tcp_cwnd=0.0,
        ack_cnt=0,
        min_rtt=math.inf,
    )
    state = cubic.on_loss(state, params)
    state = cubic.epoch_begin(state, params, 0.0)
    return state.cwnd, state.origin_point, state.k_seconds


def _epoch_end(w_cap: float, origin: float, k: float, c: float) -> float:
    """Time at which origin + C*(t-K)^3 re-reaches w_cap."""
    d = (w_cap - origin) / c
    return k + math.copysign(abs(d) ** (1.0 / 3.0), d) if d != 0 else k


def predict_trace(model: PredictorModel) -> PredictedTrace:
    # The model's stated assumptions: no fast convergence, no friendly floor.
    params = replace(
        model.cubic_params, fast_convergence=False, tcp_friendliness=False
    )
    w_cap = peak_window(model.link, model.mss)
    rtt_s = model.link.rtt_ms / 1000.0
    c = params.c_scale
    diagnostics: list[str] = []
    alpha_below_beta = params.alpha < params.beta
    if alpha_below_beta:
        diagnostics.append(
            "alpha < beta: post-loss window exceeds its own plateau; "
            "epochs probe convexly from the cut window (K=0)"
        )

    # Piecewise segments: (t_start, t_end, fn(t - t_start) -> cwnd).
    pieces: list[tuple[float, float, object]] = []
    t = 0.0

    if model.include_slow_start and model.initcwnd < w_cap:
        # Doubling per RTT until the window first touches the ceiling.
        touch = rtt_s * math.log2(w_cap / model.initcwnd)
        init = float(model.initcwnd)
        pieces.append(
            (0.0, touch, lambda dt, i=init: min(i * 2.0 ** (dt / rtt_s), w_cap))
        )
        t = touch

    epoch_period: Optional[float] = None
    truncated = 0
    w_loss = w_cap
    while t < model.duration_s:
        w0, origin, k = _epoch_shape(w_loss, params)
        end = _epoch_end(w_cap, origin, k, c)
        if end <= FLAT_EPOCH_S:
            # No reduction (or the curve starts at the ceiling): flat line.
            pieces.append((t, model.duration_s, lambda dt: w_cap))
            t = model.duration_s
            epoch_period = None
            break
        if k > 0 and end > EPOCH_CAP_FACTOR * k:
            truncated += 1
            end = EPOCH_CAP_FACTOR * k
            diagnostics.append(
                f"epoch at t={t:.1f}s cannot re-reach {w_cap:.0f} segments "
                f"within {EPOCH_CAP_FACTOR:.0f}*K; truncated at {end:.1f}s"
            )
        pieces.append(
            (t, t + end, lambda dt, o=origin, kk=k: o + c * (dt - kk) ** 3)
        )
        epoch_period = end
        w_loss = origin + c * (end - k) ** 3
        t += end

    samples: list[tuple[float, float]] = []
    step_s = SAMPLE_STEP_MS / 1000.0
    n = int(model.duration_s / step_s) + 1
    piece_idx = 0
    peak = 0.0
    for i in range(n):
        ts = i * step_s
        while piece_idx + 1 < len(pieces) and ts >= pieces[piece_idx][1]:
            piece_idx += 1
        t0, _, fn = pieces[piece_idx]
        # Every regime's fluid curve tops out at the overflow ceiling.
        w = min(max(float(fn(ts - t0)), cubic.MIN_CWND), max(w_cap, cubic.MIN_CWND))
        peak = max(peak, w)
        samples.append((ts, w))

    return PredictedTrace(
        samples=samples,
        peak_segments=peak,
        epoch_period_s=epoch_period,
        alpha_below_beta=alpha_below_beta,
        truncated_epochs=truncated,
        diagnostics=diagnostics,
    )


def trace_to_csv(trace: PredictedTrace) -> str:
    """Telemetry-schema CSV with flow_id `predicted`, for direct overlay."""
    lines = [TELEMETRY_CSV_HEADER]
    for t_s, w in trace.samples:
        t_ms = round(t_s * 1000)
        lines.append(f"{t_ms},{PREDICTED_FLOW_ID},{w:.6f},0.0,0.000,0,0")
    return "\n".join(lines) + "\n"
