/** Box and lasso selection in data coordinates, matching the server's
 * inclusive-boundary rules so client previews agree with replays. */

import type { GeometryPayload, ScatterPoint } from "./types.js";

export interface Box {
  type: "box";
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export interface Lasso {
  type: "lasso";
  vertices: [number, number][];
}

export type Geometry = Box | Lasso;

export function geometryToPayload(g: Geometry): GeometryPayload {
  if (g.type === "box") {
    return { type: "box", x_min: g.xMin, x_max: g.xMax, y_min: g.yMin, y_max: g.yMax };
  }
  return { type: "lasso", vertices: g.vertices.map((v) => [v[0], v[1]]) };
}

export function geometryFromPayload(p: GeometryPayload): Geometry {
  if (p.type === "box") {
    return {
      type: "box",
      xMin: p.x_min ?? 0,
      xMax: p.x_max ?? 0,
      yMin: p.y_min ?? 0,
      yMax: p.y_max ?? 0,
    };
  }
  return { type: "lasso", vertices: (p.vertices ?? []).map((v) => [v[0], v[1]]) };
}

function onSegment(
  px: number, py: number,
  ax: number, ay: number,
  bx: number, by: number,
): boolean {
  const cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  if (cross !== 0) return false;
  return (
    Math.min(ax, bx) <= px && px <= Math.max(ax, bx) &&
    Math.min(ay, by) <= py && py <= Math.max(ay, by)
  );
}

/** Even-odd ray casting; points exactly on an edge count inside. */
export function pointInPolygon(
  x: number,
  y: number,
  vertices: [number, number][],
): boolean {
  const n = vertices.length;
  let inside = false;
  for (let i = 0; i < n; i++) {
    const [ax, ay] = vertices[i];
    const [bx, by] = vertices[(i + 1) % n];
    if (onSegment(x, y, ax, ay, bx, by)) return true;
    if ((ay <= y && y < by) || (by <= y && y < ay)) {
      const xCross = ax + ((y - ay) * (bx - ax)) / (by - ay);
      if (x < xCross) inside = !inside;
    }
  }
  return inside;
}

export function selectIds(points: ScatterPoint[], g: Geometry): Set<string> {
  const out = new Set<string>();
  for (const p of points) {
    const hit =
      g.type === "box"
        ? g.xMin <= p.x && p.x <= g.xMax && g.yMin <= p.y && p.y <= g.yMax
        : pointInPolygon(p.x, p.y, g.vertices);
    if (hit) out.add(p.sim_id);
  }
  return out;
}
