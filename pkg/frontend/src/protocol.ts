// Wire protocol types and frame helpers. This module is the only place
// that knows the JSON shapes; everything else works with these types.

export type Scope = "global" | `flow:${number}`;

export type ParamName =
  | "alpha"
  | "beta"
  | "fast_convergence"
  | "tcp_friendliness"
  | "rto_min_ms"
  | "initcwnd";

export interface SetParamFrame {
  type: "set_param";
  scope: Scope;
  name: ParamName;
  value: number;
}

export interface FlowTelemetry {
  id: number;
  cwnd: number;
  goodput_bps: number;
  srtt_ms: number;
  retx: number;
}

export interface TelemetryFrame {
  type: "telemetry";
  t_ms: number;
  flows: FlowTelemetry[];
  queue_bytes: number;
}

export interface ParamsFrame {
  type: "params";
  global: Record<string, number>;
  flows: Array<Record<string, number>>;
}

export interface AckFrame {
  type: "ack";
  applied_at_ms: number;
}

export interface PredictionFrame {
  type: "prediction";
  series: Array<[number, number]>;
}

export interface ErrorFrame {
  type: "error";
  message: string;
}

export type ServerFrame =
  | TelemetryFrame
  | ParamsFrame
  | AckFrame
  | PredictionFrame
  | ErrorFrame;

export const PARAM_RANGES: Record<ParamName, { min: number; max: number }> = {
  alpha: { min: 1, max: 1024 },
  beta: { min: 1, max: 1024 },
  fast_convergence: { min: 0, max: 1 },
  tcp_friendliness: { min: 0, max: 1 },
  rto_min_ms: { min: 1, max: 60000 },
  initcwnd: { min: 2, max: 1024 },
};

export function inRange(name: ParamName, value: number): boolean {
  const r = PARAM_RANGES[name];
  return Number.isInteger(value) && value >= r.min && value <= r.max;
}

export function setParamFrame(
  scope: Scope,
  name: ParamName,
  value: number,
): SetParamFrame {
  if (!inRange(name, value)) {
    throw new RangeError(`${name}=${value} outside ${JSON.stringify(PARAM_RANGES[name])}`);
  }
  return { type: "set_param", scope, name, value };
}

export function parseServerFrame(raw: string): ServerFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    throw new Error(`unparseable frame: ${raw.slice(0, 80)}`);
  }
  if (typeof doc !== "object" || doc === null || !("type" in doc)) {
    throw new Error("frame is not an object with a type");
  }
  const frame = doc as { type: string };
  switch (frame.type) {
    case "telemetry":
    case "params":
    case "ack":
    case "prediction":
    case "error":
      return frame as ServerFrame;
    default:
      throw new Error(`unknown frame type ${frame.type}`);
  }
}

// Server address resolution: ?server=host:port beats the default.
export function serverUrl(query: string, fallback = "127.0.0.1:8765"): string {
  const params = new URLSearchParams(query);
  const addr = params.get("server") || fallback;
  return addr.startsWith("ws://") || addr.startsWith("wss://")
    ? addr
    : `ws://${addr}`;
}
