// Fixed-capacity time series used by the charts. Capacity defaults to the
// last 120 s of telemetry at 5 Hz.

export const DEFAULT_CAPACITY = 120 * 5;

export class RingSeries {
  private ts: Float64Array;
  private vs: Float64Array;
  private start = 0;
  private count = 0;

  constructor(readonly capacity = DEFAULT_CAPACITY) {
    if (capacity <= 0) throw new RangeError(`capacity must be positive, got ${capacity}`);
    this.ts = new Float64Array(capacity);
    this.vs = new Float64Array(capacity);
  }

  get length(): number {
    return this.count;
  }

  push(t: number, v: number): void {
    const last = this.count > 0 ? this.at(this.count - 1)[0] : -Infinity;
    if (t < last) return; // stale frame after a reconnect; x stays monotone
    const idx = (this.start + this.count) % this.capacity;
    this.ts[idx] = t;
    this.vs[idx] = v;
    if (this.count < this.capacity) {
      this.count++;
    } else {
      this.start = (this.start + 1) % this.capacity;
    }
  }

  at(i: number): [number, number] {
    if (i < 0 || i >= this.count) throw new RangeError(`index ${i} of ${this.count}`);
    const idx = (this.start + i) % this.capacity;
    return [this.ts[idx], this.vs[idx]];
  }

  clear(): void {
    this.start = 0;
    this.count = 0;
  }

  // Dense copies in index order, for drawing.
  toArrays(): { t: number[]; v: number[] } {
    const t: number[] = new Array(this.count);
    const v: number[] = new Array(this.count);
    for (let i = 0; i < this.count; i++) {
      const [ti, vi] = this.at(i);
      t[i] = ti;
      v[i] = vi;
    }
    return { t, v };
  }

  valueRange(): [number, number] {
    let lo = Infinity;
    let hi = -Infinity;
    for (let i = 0; i < this.count; i++) {
      const v = this.at(i)[1];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    return [lo, hi];
  }
}
