"""Deterministic discrete-event simulator for a single bottleneck link.

Time is integer microseconds internally; all float time enters and leaves
at the API surface. Events with equal fire times are processed in
insertion order, so a (scenario, seed) pair fully determines the run.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .cubic import CubicParams
from .transport import MSS, Flow, RouteParams, Segment

US = 1_000_000  # microseconds per second
TELEMETRY_INTERVAL_US = 200_000  # 5 Hz

# event kinds
EV_FLOW_START = 0
EV_DEQUEUE = 1
EV_SEG_ARRIVAL = 2
EV_ACK_ARRIVAL = 3
EV_RTO = 4
EV_TELEMETRY = 5
EV_PARAM_UPDATE = 6

DROP_TAILDROP = "tail_drop"
DROP_RANDOM = "random"

TELEMETRY_CSV_HEADER = "t_ms,flow_id,cwnd_segments,goodput_bps,srtt_ms,retx_total,queue_bytes"


class SimError(Exception):
    """Internal consistency violation (bug signal)."""


@dataclass(frozen=True, slots=True)
class LinkConfig:
    rate_bps: float
    rtt_ms: float
    queue_bytes: int
    loss_prob: float = 0.0
    seed: int = 1

    def __post_init__(self):
        if self.rate_bps <= 0:
            raise ValueError(f"rate_bps must be positive, got {self.rate_bps}")
        if self.rtt_ms <= 0:
            raise ValueError(f"rtt_ms must be positive, got {self.rtt_ms}")
        if self.queue_bytes < MSS:
            raise ValueError(
                f"queue_bytes must be >= one segment ({MSS}), got {self.queue_bytes}"
            )
        if not 0.0 <= self.loss_prob < 1.0:
            raise ValueError(f"loss_prob must be in [0, 1), got {self.loss_prob}")


@dataclass(slots=True)
class FlowTelemetry:
    flow_id: int
    cwnd_segments: float
    goodput_bps: float
    srtt_ms: float
    retx_total: int
    # cumulative counters, kept for summary computations (not in the CSV)
    sent_bytes_total: int = 0
    delivered_bytes_total: int = 0
    offered_bps: float = 0.0


@dataclass(slots=True)
class TelemetrySample:
    t_ms: int
    flows: list[FlowTelemetry]
    queue_bytes: int
    drops_taildrop: int = 0
    drops_random: int = 0


@dataclass(slots=True)
class _Receiver:
    rcv_nxt: int = 0
    ooo: dict[int, int] = field(default_factory=dict)

    def on_segment(self, seq: int, length: int) -> int:
        """Absorb one segment, return the cumulative ACK to send."""
        if seq == self.rcv_nxt:
            self.rcv_nxt += length
            while self.rcv_nxt in self.ooo:
                self.rcv_nxt += self.ooo.pop(self.rcv_nxt)
        elif seq > self.rcv_nxt:
            self.ooo.setdefault(seq, length)
        return self.rcv_nxt


class Simulator:
    """Owns the clock, the event heap, one bottleneck link, and all flows."""

    def __init__(self, link: LinkConfig):
        self.link = link
        self.now_us = 0
        self._heap: list = []
        self._ordinal = 0
        self.rng = random.Random(link.seed)

        self._queue: list[Segment] = []  # used as FIFO via index
        self._queue_head = 0
        self.queue_occupancy = 0
        self._link_busy = False

        self.drops_taildrop = 0
        self.drops_random = 0
        self.offered_bytes = 0  # everything handed to the link, drops included

        self.flows: dict[int, Flow] = {}
        self._next_flow_id = 0
        self._receivers: dict[int, _Receiver] = {}
        self._rto_deadlines: dict[int, int] = {}  # flow_id -> scheduled us
        self._prev_delivered: dict[int, int] = {}
        self._prev_sent: dict[int, int] = {}

        self.telemetry: list[TelemetrySample] = []
        self.on_sample: Optional[Callable[[TelemetrySample], None]] = None

        self._prop_us = int(round(link.rtt_ms * 1000 / 2))
        self._schedule(0, EV_TELEMETRY, None)

    # -- scheduling --------------------------------------------------------

    def _schedule(self, fire_us: int, kind: int, payload) -> None:
        if fire_us < self.now_us:
            raise SimError(f"event scheduled in the past: {fire_us} < {self.now_us}")
        heapq.heappush(self._heap, (fire_us, self._ordinal, kind, payload))
        self._ordinal += 1

    @property
    def now_s(self) -> float:
        return self.now_us / US

    # -- flows ---------------------------------------------------------------

    def add_flow(
        self,
        params: CubicParams,
        route: RouteParams,
        start_s: float = 0.0,
        bytes_goal: Optional[int] = None,
        algo_label: str = "",
        flow_id: Optional[int] = None,
    ) -> int:
        if flow_id is None:
            flow_id = self._next_flow_id
        self._next_flow_id = max(self._next_flow_id, flow_id + 1)
        start_us = max(int(round(start_s * US)), self.now_us)
        self._schedule(
            start_us,
            EV_FLOW_START,
            (flow_id, params, route, bytes_goal, algo_label),
        )
        return flow_id

    def schedule_param_update(self, apply: Callable[["Simulator"], None]) -> int:
        """Queue a callback to run at the next event boundary; returns fire time (us)."""
        self._schedule(self.now_us, EV_PARAM_UPDATE, apply)
        return self.now_us

    # -- link ----------------------------------------------------------------

    def enqueue_segment(self, seg: Segment) -> str:
        self.offered_bytes += seg.len
        if self.queue_occupancy + seg.len > self.link.queue_bytes:
            self.drops_taildrop += 1
            return DROP_TAILDROP
        # loss draw only for queue-admitted segments, so loss_prob=0 runs
        # leave the RNG untouched by the data path
        if self.link.loss_prob > 0.0 and self.rng.random() < self.link.loss_prob:
            self.drops_random += 1
            return DROP_RANDOM
        self.queue_occupancy += seg.len
        self._queue.append(seg)
        if not self._link_busy:
            self._serve_next()
        return "enqueued"

    def _serve_next(self) -> None:
        if self._queue_head >= len(self._queue):
            self._queue.clear()
            self._queue_head = 0
            self._link_busy = False
            return
        seg = self._queue[self._queue_head]
        self._queue_head += 1
        self._link_busy = True
        ser_us = int(round(seg.len * 8 * US / self.link.rate_bps))
        self._schedule(self.now_us + ser_us, EV_DEQUEUE, seg)

    # -- event processing ------------------------------------------------------

    def run(self, until_s: float) -> None:
        until_us = int(round(until_s * US))
        if until_us < self.now_us:
            raise SimError(f"cannot run backwards to {until_s}s")
        heap = self._heap
        while heap and heap[0][0] <= until_us:
            fire_us, _, kind, payload = heapq.heappop(heap)
            if fire_us < self.now_us:
                raise SimError("event fired in the past")
            self.now_us = fire_us
            self._dispatch(kind, payload)
        self.now_us = until_us

    def step(self) -> Optional[int]:
        """Process a single event; returns its fire time (us) or None if idle."""
        if not self._heap:
            return None
        fire_us, _, kind, payload = heapq.heappop(self._heap)
        self.now_us = fire_us
        self._dispatch(kind, payload)
        return fire_us

    def next_event_us(self) -> Optional[int]:
        return self._heap[0][0] if self._heap else None

    def _dispatch(self, kind: int, payload) -> None:
        if kind == EV_DEQUEUE:
            seg: Segment = payload
            self.queue_occupancy -= seg.len
            self._schedule(self.now_us + self._prop_us, EV_SEG_ARRIVAL, seg)
            self._serve_next()
        elif kind == EV_SEG_ARRIVAL:
            seg = payload
            receiver = self._receivers[seg.flow_id]
            ack = receiver.on_segment(seg.seq, seg.len)
            self._schedule(
                self.now_us + self._prop_us,
                EV_ACK_ARRIVAL,
                (seg.flow_id, ack, seg.seq + seg.len),
            )
        elif kind == EV_ACK_ARRIVAL:
            flow_id, ack, echo_end = payload
            flow = self.flows.get(flow_id)
            if flow is None:
                return
            sends = flow.on_ack_segment(ack, self.now_s, echo_end)
            for s in sends:
                self.enqueue_segment(s)
            self._sync_rto(flow)
        elif kind == EV_RTO:
            flow_id, fire_us = payload
            flow = self.flows.get(flow_id)
            if flow is None:
                return
            if self._rto_deadlines.get(flow_id) == fire_us:
                del self._rto_deadlines[flow_id]
            if flow.rto_deadline is None:
                return
            actual_us = int(round(flow.rto_deadline * US))
            if actual_us > self.now_us:
                self._sync_rto(flow)  # deadline moved forward; re-arm lazily
                return
            sends = flow.on_rto(self.now_s)
            for s in sends:
                self.enqueue_segment(s)
            self._sync_rto(flow)
        elif kind == EV_TELEMETRY:
            self._sample_telemetry()
            self._schedule(self.now_us + TELEMETRY_INTERVAL_US, EV_TELEMETRY, None)
        elif kind == EV_FLOW_START:
            flow_id, params, route, bytes_goal, algo_label = payload
            flow = Flow(
                flow_id, params, route,
                start_time=self.now_s, bytes_goal=bytes_goal, algo_label=algo_label,
            )
            self.flows[flow_id] = flow
            self._receivers[flow_id] = _Receiver()
            self._prev_delivered[flow_id] = 0
            self._prev_sent[flow_id] = 0
            for s in flow.emit_sends(self.now_s):
                self.enqueue_segment(s)
            self._sync_rto(flow)
        elif kind == EV_PARAM_UPDATE:
            payload(self)
        else:
            raise SimError(f"unknown event kind {kind}")

    def _sync_rto(self, flow: Flow) -> None:
        # Lazy timer: keep at most one pending wakeup per flow; if the real
        # deadline slid forward, the stale wakeup re-arms instead of firing.
        if flow.rto_deadline is None:
            return
        deadline_us = max(int(round(flow.rto_deadline * US)), self.now_us)
        pending = self._rto_deadlines.get(flow.flow_id)
        if pending is not None and pending <= deadline_us:
            return
        self._rto_deadlines[flow.flow_id] = deadline_us
        self._schedule(deadline_us, EV_RTO, (flow.flow_id, deadline_us))

    # -- telemetry ----------------------------------------------------------

    def check_invariants(self) -> None:
        if not 0 <= self.queue_occupancy <= self.link.queue_bytes:
            raise SimError(
                f"queue occupancy {self.queue_occupancy} outside "
                f"[0, {self.link.queue_bytes}]"
            )
        for flow in self.flows.values():
            flow.check_invariants()

    def _sample_telemetry(self) -> None:
        self.check_invariants()
        window_s = TELEMETRY_INTERVAL_US / US
        flows = []
        for fid, flow in self.flows.items():
            delivered = flow.delivered_bytes
            sent = flow.bytes_sent
            goodput = (delivered - self._prev_delivered[fid]) * 8 / window_s
            offered = (sent - self._prev_sent[fid]) * 8 / window_s
            self._prev_delivered[fid] = delivered
            self._prev_sent[fid] = sent
            flows.append(
                FlowTelemetry(
                    flow_id=fid,
                    cwnd_segments=flow.cc.cwnd,
                    goodput_bps=goodput,
                    srtt_ms=(flow.srtt or 0.0) * 1000,
                    retx_total=flow.retx_segments,
                    sent_bytes_total=sent,
                    delivered_bytes_total=delivered,
                    offered_bps=offered,
                )
            )
        sample = TelemetrySample(
            t_ms=self.now_us // 1000,
            flows=flows,
            queue_bytes=self.queue_occupancy,
            drops_taildrop=self.drops_taildrop,
            drops_random=self.drops_random,
        )
        self.telemetry.append(sample)
        if self.on_sample is not None:
            self.on_sample(sample)


def telemetry_to_csv(samples: list[TelemetrySample]) -> str:
    """Render telemetry in the canonical CSV schema, one row per flow per tick."""
    lines = [TELEMETRY_CSV_HEADER]
    for sample in samples:
        for f in sample.flows:
            lines.append(
                f"{sample.t_ms},{f.flow_id},{f.cwnd_segments:.6f},"
                f"{f.goodput_bps:.1f},{f.srtt_ms:.3f},{f.retx_total},"
                f"{sample.queue_bytes}"
            )
    return "\n".join(lines) + "\n"
