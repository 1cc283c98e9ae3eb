"""Closed-form window model: overflow ceiling, sawtooth geometry, edge
regimes, and CSV overlay format."""

import pytest

from tunerlab import cubic, predictor, scenarios
from tunerlab.netsim import TELEMETRY_CSV_HEADER
from tunerlab.predictor import PredictorModel, peak_window, predict_trace, trace_to_csv


def link(**kw):
    return scenarios.paper_link(**kw)


def model(alpha_q=512, beta_q=717, duration_s=60.0, **kw):
    return PredictorModel(
        cubic_params=cubic.decode_params(alpha_q, beta_q, True, True),
        link=link(),
        duration_s=duration_s,
        **kw,
    )


# -- overflow ceiling ---------------------------------------------------------


def test_peak_window_paper_link():
    assert peak_window(link(), 1000) == pytest.approx(240.0)


def test_peak_window_bdp_only():
    from tunerlab.netsim import LinkConfig

    no_queue = LinkConfig(rate_bps=12e6, rtt_ms=80.0, queue_bytes=1000)
    assert peak_window(no_queue, 1000) == pytest.approx(121.0)  # 120 BDP + 1 queue


def test_peak_window_queue_term_linear():
    doubled = scenarios.paper_link()
    from dataclasses import replace

    doubled = replace(doubled, queue_bytes=240_000)
    assert peak_window(doubled, 1000) == pytest.approx(360.0)
    with pytest.raises(ValueError):
        peak_window(link(), 0)


# -- sawtooth geometry ----------------------------------------------------------


def test_default_epoch_period_in_expected_band():
    trace = predict_trace(model())
    assert trace.epoch_period_s is not None
    assert 5.6 <= trace.epoch_period_s <= 7.0
    assert trace.peak_segments == pytest.approx(240.0, rel=1e-6)


def test_beta_one_flat_after_first_touch():
    trace = predict_trace(model(beta_q=1024))
    assert trace.epoch_period_s is None
    assert max(w for _, w in trace.samples) == pytest.approx(240.0)
    # once the ceiling is reached the line never leaves it
    touched = False
    for _, w in trace.samples:
        if w >= 240.0 - 1e-9:
            touched = True
        elif touched:
            pytest.fail("window left the ceiling after touching it")
    assert touched


def test_alpha_two_epochs_cut_short_at_ceiling():
    # plateau 480 sits above the 240 ceiling, so epochs end mid-climb
    trace = predict_trace(model(alpha_q=1024))
    assert trace.peak_segments <= 240.0 + 1e-9
    assert trace.epoch_period_s is not None
    # curve is still concave at the cut: shorter epochs than the default
    base = predict_trace(model())
    assert trace.epoch_period_s < base.epoch_period_s


def test_alpha_below_beta_flagged():
    trace = predict_trace(model(alpha_q=256, beta_q=717))
    assert trace.alpha_below_beta
    assert any("alpha < beta" in d for d in trace.diagnostics)


def test_unreachable_ceiling_truncated_with_diagnostic():
    # alpha one step above beta: K is tiny but the remaining climb to the
    # ceiling is enormous, so the epoch hits the 10*K cap
    trace = predict_trace(model(alpha_q=11, beta_q=21))
    assert trace.truncated_epochs > 0
    assert any("truncated" in d for d in trace.diagnostics)


def test_steady_epochs_identical_for_alpha_one():
    trace = predict_trace(model(duration_s=120.0))
    period = trace.epoch_period_s
    ws = [w for _, w in trace.samples]
    # every recurrence of the trough is one period apart: find loss instants
    troughs = [
        trace.samples[i][0]
        for i in range(1, len(ws))
        if ws[i] < ws[i - 1] - 1.0
    ]
    gaps = [b - a for a, b in zip(troughs, troughs[1:])]
    assert gaps
    for g in gaps:
        assert g == pytest.approx(period, abs=0.2 + 1e-9)


def test_continuity_except_at_loss():
    trace = predict_trace(model())
    for (t0, w0), (t1, w1) in zip(trace.samples, trace.samples[1:]):
        if w1 >= w0:
            continue
        # downward jumps only at loss instants, and by roughly (1-beta)*peak
        assert w0 - w1 <= 240.0 * (1 - 717 / 1024) + 5.0


def test_sampling_cadence_and_clamps():
    trace = predict_trace(model(duration_s=10.0))
    assert [t for t, _ in trace.samples] == pytest.approx(
        [i * 0.2 for i in range(51)]
    )
    for _, w in trace.samples:
        assert 2.0 <= w <= 240.0 + 1e-9


def test_slow_start_head_doubles_per_rtt():
    trace = predict_trace(model())
    t0, w0 = trace.samples[0]
    assert w0 == pytest.approx(10.0, rel=1e-6)
    # after one RTT (80 ms) the fluid head has doubled; sample at 0.2 s
    # is 10 * 2^(0.2/0.08)
    _, w1 = trace.samples[1]
    assert w1 == pytest.approx(10.0 * 2 ** (0.2 / 0.08), rel=1e-6)


def test_model_validation():
    with pytest.raises(ValueError):
        model(duration_s=0)
    with pytest.raises(ValueError):
        model(mss=0)
    with pytest.raises(ValueError):
        model(initcwnd=1)


# -- CSV overlay ----------------------------------------------------------------


def test_csv_matches_telemetry_schema():
    csv = trace_to_csv(predict_trace(model(duration_s=2.0)))
    lines = csv.strip().split("\n")
    assert lines[0] == TELEMETRY_CSV_HEADER
    assert len(lines) == 12  # header + 11 samples
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[1] == "predicted"
    assert float(first[2]) == pytest.approx(10.0)
