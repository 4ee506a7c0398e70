// Session sparkline: top retrieval score per extraction event over time,
// rendered as an SVG polyline path. Pure geometry, no DOM here.

import type { SparklinePoint } from "./viewmodel.js";

export function sparklinePath(
  points: SparklinePoint[],
  width: number,
  height: number,
  pad = 2,
): string {
  if (points.length === 0) {
    return "";
  }
  const max = Math.max(...points.map((p) => p.topScore), 1e-9);
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const step = points.length > 1 ? innerW / (points.length - 1) : 0;
  return points
    .map((point, i) => {
      const x = pad + (points.length > 1 ? i * step : innerW / 2);
      const y = pad + innerH * (1 - point.topScore / max);
      return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}
