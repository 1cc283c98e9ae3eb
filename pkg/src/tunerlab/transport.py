"""Reliable byte-stream sender driving the CUBIC hooks.

One Flow per sender. The simulator owns the event loop and calls in at
event boundaries; nothing here is thread-safe and nothing needs to be.
Sequence numbers are byte offsets, MSS is fixed at 1000 bytes.

Loss handling: cumulative ACKs, three duplicates enter one recovery
episode with a single congestion reduction. Every ACK also echoes the
segment that produced it, so the sender keeps a scoreboard of which
outstanding segments have arrived and repairs inferred holes at up to one
retransmission per incoming ACK. A retransmission timeout collapses the
window and falls back to go-back-N resend.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import cubic
from .cubic import CubicParams

MSS = 1000
DUPACK_THRESHOLD = 3
REORDER_BYTES = DUPACK_THRESHOLD * MSS  # hole is "lost" once 3 later segments arrived
RTO_NO_SAMPLE_S = 1.0  # initial RTO before any RTT measurement
RTO_MAX_S = 60.0
HOLE_SCAN_LIMIT = 256  # scoreboard scan cap per ACK
BURST_LIMIT = 8  # new segments per ACK while the pipe is non-empty
HOLE_RETRY_FACTOR = 1.0  # fraction of srtt before a repaired hole is retried

DEFAULT_RTO_MIN_MS = 200.0
DEFAULT_INITCWND = 10

# send-record slots
R_SENT_AT = 0
R_EVER_RETX = 1
R_ARRIVED = 2
R_LAST_SENT = 3


class ProtocolError(Exception):
    """An ACK acknowledged data that was never sent (simulator bug)."""


@dataclass(frozen=True, slots=True)
class RouteParams:
    rto_min_ms: float = DEFAULT_RTO_MIN_MS
    initcwnd: int = DEFAULT_INITCWND

    def __post_init__(self):
        if self.rto_min_ms <= 0:
            raise ValueError(f"rto_min_ms must be positive, got {self.rto_min_ms}")
        if self.initcwnd < 2:
            raise ValueError(f"initcwnd must be >= 2, got {self.initcwnd}")


@dataclass(slots=True)
class Segment:
    flow_id: int
    seq: int
    len: int
    is_retransmit: bool
    sent_at: float


def rto_value(
    srtt: Optional[float],
    rttvar: Optional[float],
    route: RouteParams,
    backoff: int,
) -> float:
    if backoff < 0:
        raise ValueError(f"backoff must be >= 0, got {backoff}")
    if srtt is None:
        base = RTO_NO_SAMPLE_S
    else:
        base = srtt + 4.0 * rttvar
    rto = max(base, route.rto_min_ms / 1000.0) * (2.0 ** backoff)
    return min(rto, RTO_MAX_S)


class Flow:
    """Sender-side transport state for one flow."""

    __slots__ = (
        "flow_id", "params", "route", "cc",
        "snd_una", "snd_nxt", "bytes_goal",
        "dupack_count", "in_recovery_until", "loss_guard_seq",
        "srtt", "rttvar", "rto_deadline", "rto_backoff",
        "segments_sent", "bytes_sent", "retx_segments", "delivered_bytes",
        "loss_events", "fast_recoveries", "timeouts",
        "started_at", "completed_at",
        "_send_records", "highest_arrived", "algo_label", "high_water",
        "_drain_ceiling",
    )

    def __init__(
        self,
        flow_id: int,
        params: CubicParams,
        route: RouteParams,
        start_time: float = 0.0,
        bytes_goal: Optional[int] = None,
        algo_label: str = "",
    ):
        if bytes_goal is not None and bytes_goal <= 0:
            raise ValueError(f"bytes_goal must be positive, got {bytes_goal}")
        self.flow_id = flow_id
        self.params = params
        self.route = route
        self.cc = cubic.init_state(route.initcwnd)
        self.snd_una = 0
        self.snd_nxt = 0
        self.bytes_goal = bytes_goal
        self.dupack_count = 0
        self.in_recovery_until: Optional[int] = None
        self.loss_guard_seq = 0  # dupACKs below this never open a new episode
        self.srtt: Optional[float] = None
        self.rttvar: Optional[float] = None
        self.rto_deadline: Optional[float] = None
        self.rto_backoff = 0
        self.segments_sent = 0
        self.bytes_sent = 0
        self.retx_segments = 0
        self.delivered_bytes = 0
        self.loss_events = 0
        self.fast_recoveries = 0
        self.timeouts = 0
        self.started_at = start_time
        self.completed_at: Optional[float] = None
        # scoreboard: end_seq -> [sent_at, ever_retx, arrived, last_sent];
        # dict insertion order is sequence order
        self._send_records: dict[int, list] = {}
        self.highest_arrived = 0  # highest end_seq known delivered
        self.algo_label = algo_label
        self.high_water = 0  # highest snd_nxt ever reached (go-back-N rewinds)
        # data already in flight when the window was cut is grandfathered
        # until it drains; only new sends obey the reduced cap
        self._drain_ceiling = 0

    @property
    def in_flight(self) -> int:
        return self.snd_nxt - self.snd_una

    @property
    def done(self) -> bool:
        return self.completed_at is not None

    def current_rto(self) -> float:
        return rto_value(self.srtt, self.rttvar, self.route, self.rto_backoff)

    # -- sending ---------------------------------------------------------

    def emit_sends(self, now: float) -> list[Segment]:
        """Emit new segments up to the congestion window.

        Sends are clocked: at most BURST_LIMIT segments per call so a big
        cumulative ACK jump cannot dump a whole window into the queue at
        once. An empty pipe (flow start, post-repair restart) gets the
        initial window instead.
        """
        out = []
        limit = int(self.cc.cwnd) * MSS
        budget = self.route.initcwnd if self.in_flight == 0 else BURST_LIMIT
        while len(out) < budget:
            if self.bytes_goal is not None and self.snd_nxt >= self.bytes_goal:
                break
            seg_len = MSS
            if self.bytes_goal is not None:
                seg_len = min(seg_len, self.bytes_goal - self.snd_nxt)
            if self.in_flight + seg_len > limit:
                break
            is_retx = self.snd_nxt < self.high_water
            seg = Segment(self.flow_id, self.snd_nxt, seg_len, is_retx, now)
            self._send_records[self.snd_nxt + seg_len] = [now, is_retx, False, now]
            self.snd_nxt += seg_len
            self.high_water = max(self.high_water, self.snd_nxt)
            self.segments_sent += 1
            self.bytes_sent += seg_len
            if is_retx:
                self.retx_segments += 1
            out.append(seg)
        if out and self.rto_deadline is None:
            self.rto_deadline = now + self.current_rto()
        return out

    def _retransmit_hole(self, now: float) -> Optional[Segment]:
        """Resend the first outstanding segment the scoreboard marks lost.

        A hole counts as lost once three later segments are known to have
        arrived; a hole already resent is retried only after about one RTT
        of further silence.
        """
        base = self.srtt if self.srtt is not None else RTO_NO_SAMPLE_S
        retry_after = base * HOLE_RETRY_FACTOR
        scanned = 0
        seq = self.snd_una
        for end, rec in self._send_records.items():
            if end > self.highest_arrived - REORDER_BYTES:
                break
            scanned += 1
            if scanned > HOLE_SCAN_LIMIT:
                break
            if rec[R_ARRIVED]:
                seq = end
                continue
            if now - rec[R_LAST_SENT] < retry_after:
                seq = end
                continue
            rec[R_EVER_RETX] = True
            rec[R_LAST_SENT] = now
            seg_len = end - seq
            self.segments_sent += 1
            self.bytes_sent += seg_len
            self.retx_segments += 1
            return Segment(self.flow_id, seq, seg_len, True, now)
        return None

    # -- RTT estimation ---------------------------------------------------

    def update_rtt(self, sample: float) -> None:
        if sample <= 0:
            raise ValueError(f"rtt sample must be positive, got {sample}")
        if self.srtt is None:
            self.srtt = sample
            self.rttvar = sample / 2.0
        else:
            self.rttvar = 0.75 * self.rttvar + 0.25 * abs(self.srtt - sample)
            self.srtt = 0.875 * self.srtt + 0.125 * sample
        self.rto_backoff = 0

    # -- ACK / timeout handling -------------------------------------------

    def on_ack_segment(
        self, ack_seq: int, now: float, echo_end: Optional[int] = None
    ) -> list[Segment]:
        if ack_seq > self.high_water:
            raise ProtocolError(
                f"flow {self.flow_id}: ack {ack_seq} beyond high water {self.high_water}"
            )
        # Time the segment the receiver just saw, not the cumulative head:
        # the head may have waited behind repaired holes and its age says
        # nothing about the current path delay.
        echo_sample: Optional[float] = None
        if echo_end is not None:
            rec = self._send_records.get(echo_end)
            if rec is not None:
                rec[R_ARRIVED] = True
                # Karn: only time segments that were never retransmitted.
                if not rec[R_EVER_RETX]:
                    echo_sample = now - rec[R_SENT_AT]
            if echo_end > self.highest_arrived:
                self.highest_arrived = echo_end
        if ack_seq > self.snd_nxt:
            # the receiver already holds data past a go-back-N rewind point;
            # skip ahead instead of resending it
            self.snd_nxt = ack_seq

        sends: list[Segment] = []
        if ack_seq > self.snd_una:
            newly = ack_seq - self.snd_una
            if echo_sample is not None:
                self.update_rtt(echo_sample)
            self._drop_acked_records(ack_seq)
            self.delivered_bytes += newly
            self.snd_una = ack_seq
            self.dupack_count = 0
            if self.in_recovery_until is not None and ack_seq >= self.in_recovery_until:
                self.in_recovery_until = None
            for _ in range(newly // MSS):
                self.cc = cubic.on_ack(self.cc, self.params, now, echo_sample)
            if (
                self.bytes_goal is not None
                and self.snd_una >= self.bytes_goal
                and self.completed_at is None
            ):
                self.completed_at = now
            # forward progress re-arms the timer
            if self.snd_una >= self.snd_nxt:
                self.rto_deadline = None
            else:
                self.rto_deadline = now + self.current_rto()
        elif ack_seq == self.snd_una and self.in_flight > 0:
            self.dupack_count += 1
            if (
                self.dupack_count >= DUPACK_THRESHOLD
                and self.in_recovery_until is None
                and self.snd_una >= self.loss_guard_seq
            ):
                self.in_recovery_until = self.snd_nxt
                self.loss_guard_seq = self.snd_nxt
                self.cc = cubic.on_loss(self.cc, self.params)
                self._drain_ceiling = max(self._drain_ceiling, self.in_flight)
                self.loss_events += 1
                self.fast_recoveries += 1
                self.rto_deadline = now + self.current_rto()

        repair = self._retransmit_hole(now)
        if repair is not None:
            sends.append(repair)
        sends.extend(self.emit_sends(now))
        return sends

    def on_rto(self, now: float) -> list[Segment]:
        if self.in_flight == 0:
            self.rto_deadline = None
            return []
        self.cc = cubic.on_loss(self.cc, self.params)
        self._drain_ceiling = max(self._drain_ceiling, self.in_flight)
        self.loss_events += 1
        # collapse and slow-start again; ssthresh keeps the beta-reduced value
        self.cc = replace(self.cc, cwnd=2.0)
        self.rto_backoff += 1
        self.timeouts += 1
        self.in_recovery_until = None
        self.dupack_count = 0
        self.loss_guard_seq = self.high_water
        # retransmit the earliest unacked segment, plus a few of the oldest
        # known-missing ones so a single further drop cannot stall the ACK
        # clock for another full backoff cycle
        sends = []
        seq = self.snd_una
        for end, rec in self._send_records.items():
            if len(sends) >= self.route.initcwnd:
                break
            if rec[R_ARRIVED]:
                seq = end
                continue
            rec[R_EVER_RETX] = True
            rec[R_LAST_SENT] = now
            seg_len = end - seq
            self.segments_sent += 1
            self.bytes_sent += seg_len
            self.retx_segments += 1
            sends.append(Segment(self.flow_id, seq, seg_len, True, now))
            seq = end
        sends.extend(self.emit_sends(now))
        self.rto_deadline = now + self.current_rto()
        return sends

    def check_invariants(self) -> None:
        """Raise ProtocolError if any structural invariant is broken.

        Cheap enough to run at every telemetry tick; the simulator does so,
        which is what makes live parameter storms safe to assert against.
        """
        problems = []
        if not 0 <= self.snd_una <= self.snd_nxt <= self.high_water:
            problems.append(
                f"sequence order broken: una={self.snd_una} "
                f"nxt={self.snd_nxt} high={self.high_water}"
            )
        if self.delivered_bytes > self.bytes_sent:
            problems.append(
                f"delivered {self.delivered_bytes} exceeds sent {self.bytes_sent}"
            )
        if self.cc.cwnd < cubic.MIN_CWND - 1e-9:
            problems.append(f"cwnd {self.cc.cwnd} below floor {cubic.MIN_CWND}")
        if self.srtt is not None and self.srtt <= 0:
            problems.append(f"srtt {self.srtt} not positive")
        cap = int(self.cc.cwnd) * MSS + MSS
        if self.in_flight <= cap:
            self._drain_ceiling = 0
        elif self.in_flight > max(cap, self._drain_ceiling):
            problems.append(
                f"in_flight {self.in_flight} exceeds window cap {cap} "
                f"and pre-cut level {self._drain_ceiling}"
            )
        if problems:
            raise ProtocolError(f"flow {self.flow_id}: " + "; ".join(problems))

    def _drop_acked_records(self, ack_seq: int) -> None:
        # Records are insertion-ordered by end seq; prune the acked prefix.
        dead = []
        for end in self._send_records:
            if end > ack_seq:
                break
            dead.append(end)
        for end in dead:
            del self._send_records[end]
