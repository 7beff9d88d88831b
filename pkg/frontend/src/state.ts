/** The single source of truth for what the views display.
 *
 * ViewState mirrors the server's selection settings field for field, so
 * "save" serializes it losslessly and "load settings" restores it exactly.
 */

import { parseFilter, serializeFilter, type Clause } from "./filter.js";
import {
  geometryFromPayload,
  geometryToPayload,
  type Geometry,
} from "./geometry.js";
import type { SpecPayload } from "./types.js";

export interface ViewState {
  methodId: number;
  timeStep: number;
  wShock: number;
  wEdge: number;
  colorBy: string;
  filter: Clause[];
  geometry: Geometry | null;
  subsampleP: number;
  subsampleSeed: number;
  highlighted: Set<string>;
}

export function initialViewState(methodId: number, timeStep: number): ViewState {
  return {
    methodId,
    timeStep,
    wShock: 1.0,
    wEdge: 1.0,
    colorBy: "profile",
    filter: [],
    geometry: null,
    subsampleP: 1.0,
    subsampleSeed: 0,
    highlighted: new Set(),
  };
}

/** Serialize the current view for POST /api/datasets. */
export function specFromViewState(
  state: ViewState,
  paramNames: string[],
  description: string,
): SpecPayload {
  if (!state.geometry) throw new Error("no selection to save");
  return {
    method_id: state.methodId,
    time_step: state.timeStep,
    w_shock: state.wShock,
    w_edge: state.wEdge,
    color_by: state.colorBy,
    filter: serializeFilter(state.filter, paramNames),
    geometry: geometryToPayload(state.geometry),
    subsample_p: state.subsampleP,
    subsample_seed: state.subsampleSeed,
    description,
  };
}

/** Restore the view from saved settings (GET /api/datasets/{id}/settings). */
export function viewStateFromSpec(
  spec: SpecPayload,
  paramNames: string[],
): ViewState {
  return {
    methodId: spec.method_id,
    timeStep: spec.time_step,
    wShock: spec.w_shock,
    wEdge: spec.w_edge,
    colorBy: spec.color_by,
    filter: parseFilter(spec.filter, paramNames),
    geometry: geometryFromPayload(spec.geometry),
    subsampleP: spec.subsample_p,
    subsampleSeed: spec.subsample_seed,
    highlighted: new Set(),
  };
}
