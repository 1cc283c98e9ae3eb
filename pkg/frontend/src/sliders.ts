// Slider metadata: fixed-point integer positions with scaled display values.

import { ParamName, PARAM_RANGES } from "./protocol.js";

export interface SliderSpec {
  name: ParamName;
  label: string;
  denominator: number; // display value = position / denominator
  min: number;
  max: number;
}

export const SLIDERS: SliderSpec[] = [
  { name: "alpha", label: "alpha", denominator: 512, min: 1, max: 1024 },
  { name: "beta", label: "beta", denominator: 1024, min: 1, max: 1024 },
];

export const TOGGLES: ParamName[] = ["fast_convergence", "tcp_friendliness"];

// Discrete units, infrequent changes: numeric fields rather than sliders.
export const NUMERIC_FIELDS: ParamName[] = ["rto_min_ms", "initcwnd"];

export function displayValue(spec: SliderSpec, position: number): string {
  return (position / spec.denominator).toFixed(3);
}

// Numeric-entry box accepts either the integer position or the scaled
// value ("0.5" on the beta box means position 512).
export function parseEntry(spec: SliderSpec, text: string): number | null {
  const n = Number(text.trim());
  if (!Number.isFinite(n)) return null;
  const position = Number.isInteger(n) && n >= spec.min ? n : Math.round(n * spec.denominator);
  if (position < spec.min || position > spec.max) return null;
  return position;
}

export function clampParam(name: ParamName, value: number): number {
  const r = PARAM_RANGES[name];
  return Math.min(r.max, Math.max(r.min, Math.round(value)));
}
