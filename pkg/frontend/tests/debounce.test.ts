import { describe, expect, it } from "vitest";
import { makeDebouncer } from "../src/debounce.js";

// Deterministic fake clock: timers fire only when advance() reaches them.
function fakeClock() {
  let now = 0;
  let nextId = 1;
  const timers = new Map<number, { at: number; fn: () => void }>();
  return {
    schedule(fn: () => void, ms: number): unknown {
      const id = nextId++;
      timers.set(id, { at: now + ms, fn });
      return id;
    },
    cancel(handle: unknown): void {
      timers.delete(handle as number);
    },
    advance(ms: number): void {
      now += ms;
      for (const [id, timer] of [...timers]) {
        if (timer.at <= now) {
          timers.delete(id);
          timer.fn();
        }
      }
    },
  };
}

describe("makeDebouncer", () => {
  it("collapses a rapid drag into one emit of the final value", () => {
    const clock = fakeClock();
    const emitted: Array<[string, number]> = [];
    const d = makeDebouncer<number>(
      100,
      (k, v) => emitted.push([k, v]),
      clock.schedule,
      clock.cancel,
    );
    for (let pos = 500; pos <= 520; pos++) {
      d.change("beta", pos);
      clock.advance(10); // the user drags faster than the window
    }
    expect(emitted).toEqual([]);
    clock.advance(100);
    expect(emitted).toEqual([["beta", 520]]);
  });

  it("tracks keys independently", () => {
    const clock = fakeClock();
    const emitted: Array<[string, number]> = [];
    const d = makeDebouncer<number>(
      100,
      (k, v) => emitted.push([k, v]),
      clock.schedule,
      clock.cancel,
    );
    d.change("alpha", 256);
    clock.advance(60);
    d.change("beta", 717);
    expect(d.pending("alpha")).toBe(true);
    expect(d.pending("beta")).toBe(true);
    clock.advance(50); // alpha's window elapses, beta's does not
    expect(emitted).toEqual([["alpha", 256]]);
    expect(d.pending("alpha")).toBe(false);
    clock.advance(60);
    expect(emitted).toEqual([["alpha", 256], ["beta", 717]]);
  });

  it("flush commits everything pending immediately, once", () => {
    const clock = fakeClock();
    const emitted: Array<[string, number]> = [];
    const d = makeDebouncer<number>(
      100,
      (k, v) => emitted.push([k, v]),
      clock.schedule,
      clock.cancel,
    );
    d.change("alpha", 1);
    d.change("beta", 2);
    d.flush();
    expect(emitted.sort()).toEqual([["alpha", 1], ["beta", 2]]);
    clock.advance(200); // cancelled timers must not re-fire
    expect(emitted.length).toBe(2);
  });
});
