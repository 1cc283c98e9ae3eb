"""Declarative experiments: scenario schema, presets, metrics, exports."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from . import cubic
from .cubic import CubicParams
from .netsim import LinkConfig, Simulator, TelemetrySample, telemetry_to_csv
from .transport import RouteParams

PAPER_LINK_RATE_BPS = 12e6
PAPER_LINK_RTT_MS = 80.0
PAPER_QUEUE_BYTES = 120_000
LOSSY_LINK_RTT_MS = 50.0
LOSSY_LINK_LOSS_PROB = 0.01
SECOND_FLOW_START_S = 20.0
FAIRNESS_DURATION_S = 120.0

BETA_SWEEP_Q1024 = (256, 512, 717, 921, 1024)


class ScenarioError(ValueError):
    """Scenario failed validation; message lists the offending fields."""


class TransferTimeout(RuntimeError):
    def __init__(self, message: str, result: "ExperimentResult"):
        super().__init__(message)
        self.partial_result = result


@dataclass(frozen=True, slots=True)
class FlowSpec:
    start_s: float = 0.0
    alpha_q512: int = cubic.DEFAULT_ALPHA_Q512
    beta_q1024: int = cubic.DEFAULT_BETA_Q1024
    fast_convergence: bool = True
    tcp_friendliness: bool = True
    rto_min_ms: float = 200.0
    initcwnd: int = 10
    bytes_goal: Optional[int] = None
    algo_label: str = ""

    def cubic_params(self) -> CubicParams:
        return cubic.decode_params(
            self.alpha_q512, self.beta_q1024,
            self.fast_convergence, self.tcp_friendliness,
        )

    def route_params(self) -> RouteParams:
        return RouteParams(rto_min_ms=self.rto_min_ms, initcwnd=self.initcwnd)


@dataclass(frozen=True, slots=True)
class Scenario:
    link: LinkConfig
    flows: tuple[FlowSpec, ...]
    duration_s: float
    seed: int = 1

    def validate(self) -> None:
        problems = []
        if not self.flows:
            problems.append("flows: at least one flow required")
        if self.duration_s <= 0:
            problems.append(f"duration_s: must be positive, got {self.duration_s}")
        for i, f in enumerate(self.flows):
            if f.start_s < 0 or f.start_s > self.duration_s:
                problems.append(
                    f"flows[{i}].start_s: {f.start_s} outside [0, {self.duration_s}]"
                )
            if f.bytes_goal is not None and f.bytes_goal <= 0:
                problems.append(f"flows[{i}].bytes_goal: must be positive")
            try:
                f.cubic_params()
                f.route_params()
            except ValueError as e:
                problems.append(f"flows[{i}]: {e}")
        if problems:
            raise ScenarioError("; ".join(problems))


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "link": {
            "rate_mbps": s.link.rate_bps / 1e6,
            "rtt_ms": s.link.rtt_ms,
            "queue_bytes": s.link.queue_bytes,
            "loss_prob": s.link.loss_prob,
            "seed": s.seed,
        },
        "duration_s": s.duration_s,
        "flows": [
            {
                "start_s": f.start_s,
                "alpha_q512": f.alpha_q512,
                "beta_q1024": f.beta_q1024,
                "fast_convergence": f.fast_convergence,
                "tcp_friendliness": f.tcp_friendliness,
                "rto_min_ms": f.rto_min_ms,
                "initcwnd": f.initcwnd,
                "bytes_goal": f.bytes_goal,
            }
            for f in s.flows
        ],
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        link_doc = doc["link"]
        flows_doc = doc["flows"]
        seed = int(link_doc.get("seed", 1))
        link = LinkConfig(
            rate_bps=float(link_doc["rate_mbps"]) * 1e6,
            rtt_ms=float(link_doc["rtt_ms"]),
            queue_bytes=int(link_doc["queue_bytes"]),
            loss_prob=float(link_doc.get("loss_prob", 0.0)),
            seed=seed,
        )
        flows = tuple(
            FlowSpec(
                start_s=float(f.get("start_s", 0.0)),
                alpha_q512=int(f.get("alpha_q512", cubic.DEFAULT_ALPHA_Q512)),
                beta_q1024=int(f.get("beta_q1024", cubic.DEFAULT_BETA_Q1024)),
                fast_convergence=bool(f.get("fast_convergence", True)),
                tcp_friendliness=bool(f.get("tcp_friendliness", True)),
                rto_min_ms=float(f.get("rto_min_ms", 200.0)),
                initcwnd=int(f.get("initcwnd", 10)),
                bytes_goal=(None if f.get("bytes_goal") is None else int(f["bytes_goal"])),
                algo_label=str(f.get("algo_label", "")),
            )
            for f in flows_doc
        )
        scenario = Scenario(
            link=link,
            flows=flows,
            duration_s=float(doc["duration_s"]),
            seed=seed,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"malformed scenario document: {e}") from e
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


# -- results -----------------------------------------------------------------


@dataclass(slots=True)
class FlowSummary:
    flow_id: int
    algo_label: str
    mean_goodput_bps: float
    mean_offered_bps: float
    retransmits: int
    completion_s: Optional[float]


@dataclass(slots=True)
class ExperimentResult:
    scenario: Scenario
    samples: list[TelemetrySample]
    flow_summaries: dict[int, FlowSummary]
    offered_bytes_total: int
    drops_taildrop: int
    drops_random: int

    def csv(self) -> str:
        return telemetry_to_csv(self.samples)

    def summary_dict(self) -> dict:
        return {
            "flows": [
                {
                    "flow_id": s.flow_id,
                    "algo_label": s.algo_label,
                    "mean_goodput_bps": s.mean_goodput_bps,
                    "mean_offered_bps": s.mean_offered_bps,
                    "retransmits": s.retransmits,
                    "completion_s": s.completion_s,
                }
                for s in self.flow_summaries.values()
            ],
            "link": {
                "offered_bytes_total": self.offered_bytes_total,
                "drops": {
                    "tail_drop": self.drops_taildrop,
                    "random": self.drops_random,
                },
            },
        }


def run_scenario(scenario: Scenario, collect_samples: bool = True) -> ExperimentResult:
    scenario.validate()
    link = replace(scenario.link, seed=scenario.seed)
    sim = Simulator(link)
    if not collect_samples:
        sim.telemetry = _DiscardList()
    for spec in scenario.flows:
        sim.add_flow(
            spec.cubic_params(),
            spec.route_params(),
            start_s=spec.start_s,
            bytes_goal=spec.bytes_goal,
            algo_label=spec.algo_label,
        )
    sim.run(scenario.duration_s)

    summaries = {}
    for fid, flow in sim.flows.items():
        active_s = max(scenario.duration_s - flow.started_at, 1e-9)
        summaries[fid] = FlowSummary(
            flow_id=fid,
            algo_label=flow.algo_label,
            mean_goodput_bps=flow.delivered_bytes * 8 / active_s,
            mean_offered_bps=flow.bytes_sent * 8 / active_s,
            retransmits=flow.retx_segments,
            completion_s=flow.completed_at,
        )
    return ExperimentResult(
        scenario=scenario,
        samples=list(sim.telemetry),
        flow_summaries=summaries,
        offered_bytes_total=sim.offered_bytes,
        drops_taildrop=sim.drops_taildrop,
        drops_random=sim.drops_random,
    )


class _DiscardList(list):
    def append(self, item):  # keep nothing
        pass


# -- metrics -------------------------------------------------------------------


def jain_fairness(goodputs: list[float]) -> float:
    if not goodputs:
        raise ValueError("jain_fairness needs a nonempty input")
    if any(g < 0 for g in goodputs):
        raise ValueError("goodputs must be nonnegative")
    total = sum(goodputs)
    if total == 0:
        raise ValueError("jain_fairness undefined for all-zero input")
    sq = sum(g * g for g in goodputs)
    return total * total / (len(goodputs) * sq)


def flow_series(
    result: ExperimentResult, flow_id: int, attr: str = "goodput_bps"
) -> list[tuple[int, float]]:
    out = []
    for sample in result.samples:
        for f in sample.flows:
            if f.flow_id == flow_id:
                out.append((sample.t_ms, getattr(f, attr)))
    if not out:
        raise KeyError(f"unknown flow {flow_id}")
    return out


def throughput_series(
    result: ExperimentResult, flow_id: int, window_ms: int
) -> list[tuple[int, float]]:
    """Goodput re-binned to `window_ms`; the integral is preserved."""
    if window_ms % 200 != 0 or window_ms <= 0:
        raise ValueError(f"window_ms must be a positive multiple of 200, got {window_ms}")
    base = flow_series(result, flow_id, "goodput_bps")
    per_bin = window_ms // 200
    out = []
    for i in range(0, len(base), per_bin):
        chunk = base[i:i + per_bin]
        # partial trailing bins scale by actual coverage to conserve bytes
        mean = sum(v for _, v in chunk) / len(chunk)
        out.append((chunk[0][0] + window_ms, mean))
    return out


def mean_over_window(
    result: ExperimentResult,
    flow_id: int,
    t0_s: float,
    t1_s: float,
    attr: str = "goodput_bps",
) -> float:
    values = [
        v for t_ms, v in flow_series(result, flow_id, attr)
        if t0_s * 1000 < t_ms <= t1_s * 1000
    ]
    if not values:
        return 0.0
    return sum(values) / len(values)


def aggregate_offered_over_window(
    result: ExperimentResult, t0_s: float, t1_s: float
) -> float:
    total = 0.0
    for fid in result.flow_summaries:
        total += mean_over_window(result, fid, t0_s, t1_s, attr="offered_bps")
    return total


def transfer_time(
    link: LinkConfig,
    cubic_params: CubicParams,
    route_params: RouteParams,
    bytes_goal: int,
    seeds: list[int],
) -> list[float]:
    """Completion time of a byte-limited flow, one run per seed."""
    if bytes_goal <= 0:
        raise ScenarioError(f"bytes_goal: must be positive, got {bytes_goal}")
    floor_s = bytes_goal * 8 / link.rate_bps
    cap_s = 10.0 * max(floor_s, 3.0)
    times = []
    for seed in seeds:
        scenario = Scenario(
            link=replace(link, seed=seed),
            flows=(
                FlowSpec(
                    start_s=0.0,
                    alpha_q512=cubic_params.alpha_q512,
                    beta_q1024=cubic_params.beta_q1024,
                    fast_convergence=cubic_params.fast_convergence,
                    tcp_friendliness=cubic_params.tcp_friendliness,
                    rto_min_ms=route_params.rto_min_ms,
                    initcwnd=route_params.initcwnd,
                    bytes_goal=bytes_goal,
                ),
            ),
            duration_s=cap_s,
            seed=seed,
        )
        result = run_scenario(scenario, collect_samples=False)
        completion = result.flow_summaries[0].completion_s
        if completion is None:
            raise TransferTimeout(
                f"transfer of {bytes_goal} bytes did not finish within {cap_s}s "
                f"(seed {seed})",
                result,
            )
        times.append(completion)
    return times


# -- presets ------------------------------------------------------------------


def paper_link(seed: int = 1, loss_prob: float = 0.0) -> LinkConfig:
    return LinkConfig(
        rate_bps=PAPER_LINK_RATE_BPS,
        rtt_ms=PAPER_LINK_RTT_MS,
        queue_bytes=PAPER_QUEUE_BYTES,
        loss_prob=loss_prob,
        seed=seed,
    )


def lossy_link(seed: int = 1) -> LinkConfig:
    return LinkConfig(
        rate_bps=PAPER_LINK_RATE_BPS,
        rtt_ms=LOSSY_LINK_RTT_MS,
        queue_bytes=PAPER_QUEUE_BYTES,
        loss_prob=LOSSY_LINK_LOSS_PROB,
        seed=seed,
    )


def _default_flow(**overrides) -> FlowSpec:
    return FlowSpec(**overrides)


def preset_inter_protocol_beta_1(seed: int = 1) -> Scenario:
    """Default-CUBIC flow vs a tuner flow with alpha=beta=1 joining at 20s."""
    return Scenario(
        link=paper_link(seed),
        flows=(
            _default_flow(algo_label="cubic-default"),
            FlowSpec(
                start_s=SECOND_FLOW_START_S,
                alpha_q512=512, beta_q1024=1024,
                algo_label="tuner-a1b1",
            ),
        ),
        duration_s=FAIRNESS_DURATION_S,
        seed=seed,
    )


def preset_inter_protocol_beta_025(seed: int = 1) -> Scenario:
    """Default-CUBIC flow vs a timid tuner flow with beta=0.25."""
    return Scenario(
        link=paper_link(seed),
        flows=(
            _default_flow(algo_label="cubic-default"),
            FlowSpec(
                start_s=SECOND_FLOW_START_S,
                alpha_q512=512, beta_q1024=256,
                algo_label="tuner-b025",
            ),
        ),
        duration_s=FAIRNESS_DURATION_S,
        seed=seed,
    )


def preset_intra_protocol_beta_1(seed: int = 1) -> Scenario:
    """Two tuner flows, both alpha=beta=1, second joins at 20s."""
    tuner = dict(alpha_q512=512, beta_q1024=1024)
    return Scenario(
        link=paper_link(seed),
        flows=(
            FlowSpec(algo_label="tuner-a1b1", **tuner),
            FlowSpec(start_s=SECOND_FLOW_START_S, algo_label="tuner-a1b1", **tuner),
        ),
        duration_s=FAIRNESS_DURATION_S,
        seed=seed,
    )


def preset_intra_protocol_fair(seed: int = 1) -> Scenario:
    """Two tuner flows with identical defaults (beta=0.7), second joins at 20s."""
    return Scenario(
        link=paper_link(seed),
        flows=(
            _default_flow(algo_label="tuner-default"),
            _default_flow(start_s=SECOND_FLOW_START_S, algo_label="tuner-default"),
        ),
        duration_s=FAIRNESS_DURATION_S,
        seed=seed,
    )


def preset_single_greedy(
    seed: int = 1,
    alpha_q512: int = 512,
    beta_q1024: int = cubic.DEFAULT_BETA_Q1024,
    fast_convergence: bool = True,
    tcp_friendliness: bool = True,
    duration_s: float = FAIRNESS_DURATION_S,
) -> Scenario:
    return Scenario(
        link=paper_link(seed),
        flows=(
            FlowSpec(
                alpha_q512=alpha_q512,
                beta_q1024=beta_q1024,
                fast_convergence=fast_convergence,
                tcp_friendliness=tcp_friendliness,
                algo_label="greedy",
            ),
        ),
        duration_s=duration_s,
        seed=seed,
    )


PRESETS = {
    "fig3": preset_inter_protocol_beta_1,
    "fig5": preset_inter_protocol_beta_025,
    "fig6": preset_intra_protocol_beta_1,
    "fairness": preset_intra_protocol_fair,
    "single": preset_single_greedy,
}
