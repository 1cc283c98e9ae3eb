import { describe, expect, it } from "vitest";
import {
  PARAM_RANGES,
  inRange,
  parseServerFrame,
  serverUrl,
  setParamFrame,
} from "../src/protocol.js";

describe("parameter ranges", () => {
  it("matches the server's accepted ranges", () => {
    expect(PARAM_RANGES.alpha).toEqual({ min: 1, max: 1024 });
    expect(PARAM_RANGES.beta).toEqual({ min: 1, max: 1024 });
    expect(PARAM_RANGES.fast_convergence).toEqual({ min: 0, max: 1 });
    expect(PARAM_RANGES.tcp_friendliness).toEqual({ min: 0, max: 1 });
    expect(PARAM_RANGES.rto_min_ms).toEqual({ min: 1, max: 60000 });
    expect(PARAM_RANGES.initcwnd).toEqual({ min: 2, max: 1024 });
  });

  it("rejects non-integers and out-of-range values", () => {
    expect(inRange("alpha", 512)).toBe(true);
    expect(inRange("alpha", 0)).toBe(false);
    expect(inRange("alpha", 1025)).toBe(false);
    expect(inRange("alpha", 512.5)).toBe(false);
    expect(inRange("initcwnd", 1)).toBe(false);
    expect(inRange("initcwnd", 2)).toBe(true);
  });
});

describe("setParamFrame", () => {
  it("builds a valid frame", () => {
    expect(setParamFrame("global", "beta", 512)).toEqual({
      type: "set_param",
      scope: "global",
      name: "beta",
      value: 512,
    });
    expect(setParamFrame("flow:1", "alpha", 1)).toMatchObject({
      scope: "flow:1",
    });
  });

  it("throws on out-of-range values before anything hits the wire", () => {
    expect(() => setParamFrame("global", "beta", 0)).toThrow(RangeError);
    expect(() => setParamFrame("global", "fast_convergence", 2)).toThrow(RangeError);
  });
});

describe("parseServerFrame", () => {
  it("round-trips known frame types", () => {
    const telemetry = {
      type: "telemetry",
      t_ms: 200,
      flows: [{ id: 0, cwnd: 10, goodput_bps: 1e6, srtt_ms: 80, retx: 0 }],
      queue_bytes: 0,
    };
    expect(parseServerFrame(JSON.stringify(telemetry))).toEqual(telemetry);
    expect(parseServerFrame('{"type":"ack","applied_at_ms":200}')).toEqual({
      type: "ack",
      applied_at_ms: 200,
    });
  });

  it("rejects junk", () => {
    expect(() => parseServerFrame("not json")).toThrow(/unparseable/);
    expect(() => parseServerFrame("42")).toThrow(/not an object/);
    expect(() => parseServerFrame('{"type":"mystery"}')).toThrow(/unknown frame type/);
  });
});

describe("serverUrl", () => {
  it("defaults when no query parameter is present", () => {
    expect(serverUrl("")).toBe("ws://127.0.0.1:8765");
    expect(serverUrl("?other=1")).toBe("ws://127.0.0.1:8765");
  });

  it("uses ?server= and tolerates an explicit scheme", () => {
    expect(serverUrl("?server=10.0.0.5:9000")).toBe("ws://10.0.0.5:9000");
    expect(serverUrl("?server=ws://10.0.0.5:9000")).toBe("ws://10.0.0.5:9000");
    expect(serverUrl("?server=wss://example:443")).toBe("wss://example:443");
  });
});
