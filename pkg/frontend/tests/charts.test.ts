import { describe, expect, it } from "vitest";
import { DEFAULT_LAYOUT, combinedExtent, seriesColor, toPixel } from "../src/charts.js";
import { RingSeries } from "../src/ring.js";

function series(points: Array<[number, number]>): RingSeries {
  const s = new RingSeries(points.length || 1);
  for (const [t, v] of points) s.push(t, v);
  return s;
}

describe("combinedExtent", () => {
  it("spans every series, anchored at zero on the value axis", () => {
    const a = series([[200, 10], [400, 12]]);
    const b = series([[400, 5], [600, 40]]);
    expect(combinedExtent([a, b])).toEqual({ t0: 200, t1: 600, v0: 0, v1: 40 });
  });

  it("returns null with nothing drawable", () => {
    expect(combinedExtent([])).toBeNull();
    expect(combinedExtent([series([])])).toBeNull();
    expect(combinedExtent([series([[200, 10]])])).toBeNull(); // single point
  });

  it("gives flat series a nonzero value band", () => {
    const extent = combinedExtent([series([[0, 0], [100, 0]])]);
    expect(extent).not.toBeNull();
    expect(extent!.v1).toBeGreaterThan(extent!.v0);
  });
});

describe("toPixel", () => {
  const extent = { t0: 0, t1: 1000, v0: 0, v1: 100 };
  const L = DEFAULT_LAYOUT;

  it("maps the extent corners onto the plot rectangle", () => {
    expect(toPixel(0, 0, extent, L)).toEqual([L.padLeft, L.height - L.padBottom]);
    expect(toPixel(1000, 100, extent, L)).toEqual([L.width - L.padRight, L.padTop]);
  });

  it("maps the midpoint to the plot center", () => {
    const [x, y] = toPixel(500, 50, extent, L);
    expect(x).toBeCloseTo((L.padLeft + L.width - L.padRight) / 2);
    expect(y).toBeCloseTo((L.padTop + L.height - L.padBottom) / 2);
  });
});

describe("seriesColor", () => {
  it("is stable per flow and distinct for neighbors", () => {
    expect(seriesColor(0)).toBe(seriesColor(0));
    expect(seriesColor(0)).not.toBe(seriesColor(1));
  });
});
