// Page wiring: sliders and fields publish debounced set_param frames,
// telemetry and prediction frames feed the two charts.

import { Chart } from "./charts.js";
import { makeDebouncer } from "./debounce.js";
import { ParamName, Scope, serverUrl } from "./protocol.js";
import { Session, SocketLike } from "./session.js";
import { NUMERIC_FIELDS, SLIDERS, TOGGLES, clampParam, displayValue, parseEntry } from "./sliders.js";

// Starting positions before the first params frame arrives and syncs them.
const INITIAL: Record<ParamName, number> = {
  alpha: 512,
  beta: 717,
  fast_convergence: 1,
  tcp_friendliness: 1,
  rto_min_ms: 200,
  initcwnd: 10,
};

function el<T extends HTMLElement>(tag: string, cls: string, text = ""): T {
  const node = document.createElement(tag) as T;
  node.className = cls;
  if (text) node.textContent = text;
  return node;
}

export function buildApp(root: HTMLElement): Session {
  const url = serverUrl(window.location.search);
  let scope: Scope = "global";

  const banner = el<HTMLDivElement>("div", "banner hidden");
  root.appendChild(banner);

  const chartRow = el<HTMLDivElement>("div", "charts");
  const cwndCanvas = document.createElement("canvas");
  const goodputCanvas = document.createElement("canvas");
  chartRow.appendChild(cwndCanvas);
  chartRow.appendChild(goodputCanvas);
  root.appendChild(chartRow);
  const cwndChart = new Chart(cwndCanvas, "cwnd (segments)");
  const goodputChart = new Chart(goodputCanvas, "goodput (Mbps)");

  const controls = el<HTMLDivElement>("div", "controls");
  root.appendChild(controls);

  const pendingBadges = new Map<string, HTMLSpanElement>();
  const syncers = new Map<string, (value: number) => void>();

  const session = new Session(
    url,
    {
      onStatus: (status, detail) => {
        banner.textContent = detail;
        banner.classList.toggle("hidden", status === "live");
      },
      onTelemetry: (frame) => {
        for (const flow of frame.flows) {
          cwndChart.push(flow.id, frame.t_ms, flow.cwnd);
          goodputChart.push(flow.id, frame.t_ms, flow.goodput_bps / 1e6);
        }
        cwndChart.draw();
        goodputChart.draw();
      },
      onPrediction: (series) => {
        // predicted trace is in seconds; charts share the telemetry ms axis
        cwndChart.setOverlay(series.map(([t, w]) => [t * 1000, w]));
        cwndChart.draw();
      },
      onParams: (frame) => {
        for (const [name, value] of Object.entries(frame.global)) {
          syncers.get(name)?.(value);
        }
      },
      onServerError: (message) => {
        banner.textContent = `server error: ${message}`;
        banner.classList.remove("hidden");
      },
      onPendingChange: (pending) => {
        for (const [name, badge] of pendingBadges) {
          badge.classList.toggle("hidden", !pending.has(name));
        }
      },
    },
    (wsUrl) => new WebSocket(wsUrl) as unknown as SocketLike,
  );

  const debouncer = makeDebouncer<number>(100, (name, value) => {
    session.setParam(scope, name as ParamName, value);
  });

  // Scope selector: "global" or a flow id for a single flow.
  const scopeRow = el<HTMLDivElement>("div", "control-row");
  scopeRow.appendChild(el("label", "", "scope"));
  const scopeInput = document.createElement("input");
  scopeInput.value = "global";
  scopeInput.addEventListener("change", () => {
    const raw = scopeInput.value.trim();
    if (raw === "" || raw === "global") {
      scope = "global";
    } else if (/^\d+$/.test(raw)) {
      scope = `flow:${Number(raw)}`;
    } else if (/^flow:\d+$/.test(raw)) {
      scope = raw as Scope;
    }
    scopeInput.value = scope;
  });
  scopeRow.appendChild(scopeInput);
  controls.appendChild(scopeRow);

  function addBadge(row: HTMLElement, name: string): void {
    const badge = el<HTMLSpanElement>("span", "pending hidden", "pending");
    pendingBadges.set(name, badge);
    row.appendChild(badge);
  }

  for (const spec of SLIDERS) {
    const row = el<HTMLDivElement>("div", "control-row");
    row.appendChild(el("label", "", spec.label));
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = String(spec.min);
    slider.max = String(spec.max);
    slider.value = String(INITIAL[spec.name]);
    const entry = document.createElement("input");
    entry.className = "entry";
    entry.value = displayValue(spec, INITIAL[spec.name]);
    slider.addEventListener("input", () => {
      const pos = clampParam(spec.name, Number(slider.value));
      entry.value = displayValue(spec, pos);
      debouncer.change(spec.name, pos);
    });
    entry.addEventListener("change", () => {
      const pos = parseEntry(spec, entry.value);
      if (pos === null) {
        entry.value = displayValue(spec, Number(slider.value));
        return;
      }
      slider.value = String(pos);
      entry.value = displayValue(spec, pos);
      debouncer.change(spec.name, pos);
    });
    syncers.set(spec.name, (value) => {
      slider.value = String(value);
      entry.value = displayValue(spec, value);
    });
    row.appendChild(slider);
    row.appendChild(entry);
    addBadge(row, spec.name);
    controls.appendChild(row);
  }

  for (const name of TOGGLES) {
    const row = el<HTMLDivElement>("div", "control-row");
    row.appendChild(el("label", "", name.replace(/_/g, " ")));
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = INITIAL[name] === 1;
    box.addEventListener("change", () => {
      debouncer.change(name, box.checked ? 1 : 0);
    });
    syncers.set(name, (value) => {
      box.checked = value === 1;
    });
    row.appendChild(box);
    addBadge(row, name);
    controls.appendChild(row);
  }

  for (const name of NUMERIC_FIELDS) {
    const row = el<HTMLDivElement>("div", "control-row");
    row.appendChild(el("label", "", name.replace(/_/g, " ")));
    const entry = document.createElement("input");
    entry.className = "entry";
    entry.value = String(INITIAL[name]);
    entry.addEventListener("change", () => {
      const value = Number(entry.value);
      if (!Number.isInteger(value)) {
        entry.value = String(INITIAL[name]);
        return;
      }
      const clamped = clampParam(name, value);
      entry.value = String(clamped);
      debouncer.change(name, clamped);
    });
    syncers.set(name, (value) => {
      entry.value = String(value);
    });
    row.appendChild(entry);
    addBadge(row, name);
    controls.appendChild(row);
  }

  const overlayRow = el<HTMLDivElement>("div", "control-row");
  overlayRow.appendChild(el("label", "", "show predicted cwnd"));
  const overlayBox = document.createElement("input");
  overlayBox.type = "checkbox";
  overlayBox.checked = true;
  overlayBox.addEventListener("change", () => {
    cwndChart.overlayVisible = overlayBox.checked;
    cwndChart.draw();
  });
  overlayRow.appendChild(overlayBox);
  controls.appendChild(overlayRow);

  session.start();
  return session;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  buildApp(document.getElementById("app") as HTMLElement);
}
