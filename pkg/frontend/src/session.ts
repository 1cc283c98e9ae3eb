// Connection state machine: owns the WebSocket, routes frames, tracks
// pending parameter updates, and refreshes the prediction overlay on acks.

import {
  ParamName,
  ParamsFrame,
  Scope,
  ServerFrame,
  TelemetryFrame,
  parseServerFrame,
  setParamFrame,
} from "./protocol.js";

export type SessionStatus = "connecting" | "live" | "closed";

// The subset of WebSocket the session needs; tests inject a fake.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface SessionHooks {
  onStatus(status: SessionStatus, detail: string): void;
  onParams(frame: ParamsFrame): void;
  onTelemetry(frame: TelemetryFrame): void;
  onPrediction(series: Array<[number, number]>): void;
  onServerError(message: string): void;
  onPendingChange(pendingNames: Set<string>): void;
}

const RETRY_MS = 1000;

export class Session {
  status: SessionStatus = "connecting";
  private socket: SocketLike | null = null;
  // acks arrive in send order, so a FIFO of in-flight names suffices
  private awaitingAck: Array<ParamName> = [];
  private closedByUser = false;

  constructor(
    private url: string,
    private hooks: SessionHooks,
    private connectImpl: (url: string) => SocketLike,
    private schedule: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  start(): void {
    this.closedByUser = false;
    this.open();
  }

  stop(): void {
    this.closedByUser = true;
    this.socket?.close();
  }

  setParam(scope: Scope, name: ParamName, value: number): void {
    this.sendFrame(setParamFrame(scope, name, value));
    this.awaitingAck.push(name);
    this.hooks.onPendingChange(new Set(this.awaitingAck));
  }

  requestPrediction(): void {
    this.sendFrame({ type: "get_prediction" });
  }

  addFlow(flow: Record<string, unknown>): void {
    this.sendFrame({ type: "add_flow", flow });
  }

  private open(): void {
    this.setStatus("connecting", `connecting to ${this.url}`);
    const socket = this.connectImpl(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.setStatus("live", "");
      this.awaitingAck = [];
      this.hooks.onPendingChange(new Set());
      this.sendFrame({ type: "get_params" });
      this.sendFrame({ type: "get_prediction" });
    };
    socket.onmessage = (ev) => this.onFrame(ev.data);
    socket.onerror = () => {
      // onclose follows; the banner text comes from there
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closedByUser) {
        this.setStatus("closed", "disconnected");
        return;
      }
      this.setStatus("closed", `connection lost; retrying ${this.url}`);
      this.schedule(() => {
        if (!this.closedByUser) this.open();
      }, RETRY_MS);
    };
  }

  private onFrame(raw: string): void {
    let frame: ServerFrame;
    try {
      frame = parseServerFrame(raw);
    } catch (e) {
      this.hooks.onServerError(String(e));
      return;
    }
    switch (frame.type) {
      case "telemetry":
        this.hooks.onTelemetry(frame);
        break;
      case "params":
        this.hooks.onParams(frame);
        break;
      case "ack": {
        this.awaitingAck.shift();
        this.hooks.onPendingChange(new Set(this.awaitingAck));
        // any acked parameter change can move the predicted sawtooth
        this.requestPrediction();
        break;
      }
      case "prediction":
        this.hooks.onPrediction(frame.series);
        break;
      case "error":
        // a rejected set_param still consumes its FIFO slot
        if (this.awaitingAck.length > 0) {
          this.awaitingAck.shift();
          this.hooks.onPendingChange(new Set(this.awaitingAck));
        }
        this.hooks.onServerError(frame.message);
        break;
    }
  }

  private sendFrame(frame: object): void {
    if (!this.socket || this.status !== "live") {
      if ((frame as { type?: string }).type !== "get_params") {
        this.hooks.onServerError("not connected");
      }
      return;
    }
    this.socket.send(JSON.stringify(frame));
  }

  private setStatus(status: SessionStatus, detail: string): void {
    this.status = status;
    this.hooks.onStatus(status, detail);
  }
}
