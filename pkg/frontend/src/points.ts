/** Client-side scatter projection, identical to the server's:
 * x = w_shock * dshock + w_edge * dedge, y = drho, invalid rows dropped.
 * Computing locally lets slider moves and brush changes refilter without
 * a round trip; saved selections are still replayed server-side.
 */

import type { RecordRow, ScatterPoint } from "./types.js";

export function scatterPoints(
  rows: RecordRow[],
  wShock: number,
  wEdge: number,
): ScatterPoint[] {
  const out: ScatterPoint[] = [];
  for (const row of rows) {
    if (row.invalid || row.dshock === null || row.dedge === null || row.drho === null) {
      continue;
    }
    const point: ScatterPoint = {
      sim_id: row.sim_id,
      x: wShock * row.dshock + wEdge * row.dedge,
      y: row.drho,
    };
    for (const [k, v] of Object.entries(row)) {
      if (typeof v === "number" && !["dshock", "dedge", "drho", "time_step"].includes(k)) {
        point[k] = v;
      }
    }
    out.push(point);
  }
  return out;
}
