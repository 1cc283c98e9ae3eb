"""Live-tuning front door: validated parameter updates plus a WebSocket
service that paces a scenario against the wall clock, streams telemetry,
and applies updates between events.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from dataclasses import dataclass, replace
from typing import Optional

from . import cubic, predictor
from .cubic import CubicParams
from .netsim import Simulator, TelemetrySample, TELEMETRY_INTERVAL_US, US
from .scenarios import FlowSpec, Scenario
from .transport import RouteParams

log = logging.getLogger("tunerlab.control")

PARAM_NAMES = (
    "alpha",
    "beta",
    "fast_convergence",
    "tcp_friendliness",
    "rto_min_ms",
    "initcwnd",
)
GLOBAL_SCOPE = "global"
RTO_MIN_MS_MAX = 60_000
INITCWND_MAX = 1024


class ControlError(ValueError):
    """Rejected command; the message is safe to echo to the client."""


@dataclass(frozen=True, slots=True)
class ParamUpdate:
    scope: str  # "global" or "flow:<id>"
    name: str
    value: int
    requested_at: float = 0.0  # wall time


def parse_scope(scope: str) -> Optional[int]:
    """Return the flow id for "flow:<id>" scopes, None for "global"."""
    if scope == GLOBAL_SCOPE:
        return None
    if scope.startswith("flow:"):
        try:
            return int(scope[5:])
        except ValueError:
            pass
    raise ControlError(f"unknown scope {scope!r} (expected 'global' or 'flow:<id>')")


def validate_update(scope: str, name: str, value) -> ParamUpdate:
    parse_scope(scope)
    if name not in PARAM_NAMES:
        raise ControlError(
            f"unknown parameter {name!r} (valid: {', '.join(PARAM_NAMES)})"
        )
    if not isinstance(value, int) or isinstance(value, bool):
        raise ControlError(f"{name} must be an integer, got {value!r}")
    if name in ("alpha", "beta"):
        if not cubic.Q_MIN <= value <= cubic.Q_MAX:
            raise ControlError(
                f"{name} out of range: {value} (valid {cubic.Q_MIN}..{cubic.Q_MAX})"
            )
    elif name in ("fast_convergence", "tcp_friendliness"):
        if value not in (0, 1):
            raise ControlError(f"{name} must be 0 or 1, got {value}")
    elif name == "rto_min_ms":
        if not 1 <= value <= RTO_MIN_MS_MAX:
            raise ControlError(
                f"rto_min_ms out of range: {value} (valid 1..{RTO_MIN_MS_MAX})"
            )
    elif name == "initcwnd":
        if not 2 <= value <= INITCWND_MAX:
            raise ControlError(
                f"initcwnd out of range: {value} (valid 2..{INITCWND_MAX})"
            )
    return ParamUpdate(scope=scope, name=name, value=value, requested_at=time.time())


def _updated_cubic(params: CubicParams, name: str, value: int) -> CubicParams:
    if name == "alpha":
        return replace(params, alpha_q512=value)
    if name == "beta":
        return replace(params, beta_q1024=value)
    if name == "fast_convergence":
        return replace(params, fast_convergence=bool(value))
    return replace(params, tcp_friendliness=bool(value))


@dataclass(slots=True)
class FlowDefaults:
    """Template applied to flows added after the fact (initcwnd semantics:
    like route settings, only newly started flows pick it up)."""
    params: CubicParams
    route: RouteParams


def apply_param_update(
    sim: Simulator, update: ParamUpdate, defaults: FlowDefaults
) -> float:
    """Schedule the update at the next event boundary; returns sim seconds.

    Epoch state (K, origin) is deliberately not recomputed: new values are
    read by the congestion hooks as they naturally fire, exactly like the
    runtime parameter files the design mirrors.
    """
    flow_id = parse_scope(update.scope)
    if flow_id is not None and flow_id not in sim.flows:
        raise ControlError(f"unknown flow {flow_id}")
    name, value = update.name, update.value

    def apply(s: Simulator) -> None:
        if name == "initcwnd":
            defaults.route = replace(defaults.route, initcwnd=value)
            return
        targets = (
            [s.flows[flow_id]]
            if flow_id is not None and flow_id in s.flows
            else list(s.flows.values())
        )
        if name == "rto_min_ms":
            if flow_id is None:
                defaults.route = replace(defaults.route, rto_min_ms=float(value))
            for f in targets:
                f.route = replace(f.route, rto_min_ms=float(value))
        else:
            if flow_id is None:
                defaults.params = _updated_cubic(defaults.params, name, value)
            for f in targets:
                f.params = _updated_cubic(f.params, name, value)

    return sim.schedule_param_update(apply) / US


# -- live service ---------------------------------------------------------


def _flow_spec_from_wire(doc: dict, defaults: FlowDefaults) -> FlowSpec:
    try:
        return FlowSpec(
            start_s=float(doc.get("start_s", 0.0)),
            alpha_q512=int(doc.get("alpha_q512", defaults.params.alpha_q512)),
            beta_q1024=int(doc.get("beta_q1024", defaults.params.beta_q1024)),
            fast_convergence=bool(
                doc.get("fast_convergence", defaults.params.fast_convergence)
            ),
            tcp_friendliness=bool(
                doc.get("tcp_friendliness", defaults.params.tcp_friendliness)
            ),
            rto_min_ms=float(doc.get("rto_min_ms", defaults.route.rto_min_ms)),
            initcwnd=int(doc.get("initcwnd", defaults.route.initcwnd)),
            bytes_goal=(
                None if doc.get("bytes_goal") is None else int(doc["bytes_goal"])
            ),
            algo_label=str(doc.get("algo_label", "")),
        )
    except (TypeError, ValueError) as e:
        raise ControlError(f"bad flow object: {e}") from e


def telemetry_frame(sample: TelemetrySample) -> dict:
    return {
        "type": "telemetry",
        "t_ms": sample.t_ms,
        "flows": [
            {
                "id": f.flow_id,
                "cwnd": f.cwnd_segments,
                "goodput_bps": f.goodput_bps,
                "srtt_ms": f.srtt_ms,
                "retx": f.retx_total,
            }
            for f in sample.flows
        ],
        "queue_bytes": sample.queue_bytes,
    }


class LiveRun:
    """One scenario being executed live; owns the simulator exclusively.

    Wire-protocol handling is pure message-in/messages-out so it can be
    driven by the WebSocket layer or directly by tests.
    """

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        link = replace(scenario.link, seed=scenario.seed)
        self.sim = Simulator(link)
        first = scenario.flows[0]
        self.defaults = FlowDefaults(
            params=first.cubic_params(), route=first.route_params()
        )
        for spec in scenario.flows:
            self.sim.add_flow(
                spec.cubic_params(),
                spec.route_params(),
                start_s=spec.start_s,
                bytes_goal=spec.bytes_goal,
                algo_label=spec.algo_label,
            )
        self.stopped = False
        self._pending: list[TelemetrySample] = []
        # late-bound so swapping the list out in advance_one_tick works
        self.sim.on_sample = lambda s: self._pending.append(s)

    @property
    def finished(self) -> bool:
        return self.stopped or self.sim.now_s >= self.scenario.duration_s

    def advance_one_tick(self) -> list[TelemetrySample]:
        """Run one telemetry interval; return the samples it produced."""
        until_us = min(
            self.sim.now_us + TELEMETRY_INTERVAL_US,
            int(round(self.scenario.duration_s * US)),
        )
        self.sim.run(until_us / US)
        out, self._pending = self._pending, []
        return out

    def params_snapshot(self) -> dict:
        def route_fields(route: RouteParams) -> dict:
            return {"rto_min_ms": route.rto_min_ms, "initcwnd": route.initcwnd}

        flows = []
        for fid, flow in sorted(self.sim.flows.items()):
            entry = {"id": fid, **flow.params.to_wire(), **route_fields(flow.route)}
            flows.append(entry)
        return {
            "type": "params",
            "global": {
                **self.defaults.params.to_wire(),
                **route_fields(self.defaults.route),
            },
            "flows": flows,
        }

    def handle_message(self, msg: dict) -> dict:
        """Apply one client command, return the reply frame."""
        try:
            mtype = msg.get("type")
            if mtype == "set_param":
                update = validate_update(
                    msg.get("scope", GLOBAL_SCOPE), msg.get("name"), msg.get("value")
                )
                applied_s = apply_param_update(self.sim, update, self.defaults)
                return {"type": "ack", "applied_at_ms": int(round(applied_s * 1000))}
            if mtype == "get_params":
                return self.params_snapshot()
            if mtype == "add_flow":
                spec = _flow_spec_from_wire(msg.get("flow") or {}, self.defaults)
                start = max(spec.start_s, self.sim.now_s)
                self.sim.add_flow(
                    spec.cubic_params(),
                    spec.route_params(),
                    start_s=start,
                    bytes_goal=spec.bytes_goal,
                    algo_label=spec.algo_label,
                )
                return {
                    "type": "ack",
                    "applied_at_ms": int(round(self.sim.now_s * 1000)),
                }
            if mtype == "stop":
                self.stopped = True
                return {
                    "type": "ack",
                    "applied_at_ms": int(round(self.sim.now_s * 1000)),
                }
            if mtype == "get_prediction":
                model = predictor.PredictorModel(
                    cubic_params=self.defaults.params,
                    link=self.scenario.link,
                    duration_s=self.scenario.duration_s,
                    initcwnd=self.defaults.route.initcwnd,
                )
                trace = predictor.predict_trace(model)
                return {
                    "type": "prediction",
                    "series": [[t, w] for t, w in trace.samples],
                }
            raise ControlError(f"unknown message type {mtype!r}")
        except ControlError as e:
            return {"type": "error", "message": str(e)}


async def serve(
    scenario: Scenario,
    host: str = "127.0.0.1",
    port: int = 8765,
    pace: str = "realtime",
    ready: Optional[asyncio.Event] = None,
) -> None:
    """Run the scenario paced to the wall clock (or flat out), speaking the
    wire protocol to any number of WebSocket clients. Returns when the
    scenario finishes or a client sends stop.
    """
    import websockets

    if pace not in ("realtime", "fast"):
        raise ControlError(f"unknown pace {pace!r} (valid: realtime, fast)")
    run = LiveRun(scenario)
    clients: set = set()

    async def handler(ws):
        clients.add(ws)
        try:
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("frame must be a JSON object")
                except ValueError as e:
                    reply = {"type": "error", "message": f"malformed frame: {e}"}
                else:
                    reply = run.handle_message(msg)
                await ws.send(json.dumps(reply))
        finally:
            clients.discard(ws)

    async def broadcast(frames: list[dict]) -> None:
        if not clients or not frames:
            return
        payloads = [json.dumps(f) for f in frames]
        dead = []
        for ws in clients:
            try:
                for p in payloads:
                    await ws.send(p)
            except Exception:
                dead.append(ws)
        for ws in dead:
            clients.discard(ws)

    tick_s = TELEMETRY_INTERVAL_US / US
    async with websockets.serve(handler, host, port):
        if ready is not None:
            ready.set()
        log.info("serving on %s:%d (pace=%s)", host, port, pace)
        started = time.monotonic()
        while not run.finished:
            if pace == "realtime":
                wall_target = started + run.sim.now_s + tick_s
                delay = wall_target - time.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)  # let client handlers run
            samples = run.advance_one_tick()
            await broadcast([telemetry_frame(s) for s in samples])
        log.info("scenario finished at t=%.1fs", run.sim.now_s)
