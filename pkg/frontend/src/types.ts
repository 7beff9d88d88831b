/** Shared payload types mirroring the HTTP/JSON contract. */

export interface MethodSummary {
  method_id: number;
  gt_id: number;
  gt_sim_id: string;
  gt_time_step: number;
  norm: string;
  description: string;
}

/** One post-processed record: distances plus the simulation's parameter levels. */
export interface RecordRow {
  sim_id: string;
  time_step: number;
  dshock: number | null;
  dedge: number | null;
  drho: number | null;
  invalid: boolean;
  [param: string]: string | number | boolean | null;
}

export interface ScatterPoint {
  sim_id: string;
  x: number;
  y: number;
  [param: string]: string | number;
}

export interface GeometryPayload {
  type: "box" | "lasso";
  x_min?: number | null;
  x_max?: number | null;
  y_min?: number | null;
  y_max?: number | null;
  vertices?: [number, number][] | null;
}

export interface SpecPayload {
  method_id: number;
  time_step: number;
  w_shock: number;
  w_edge: number;
  color_by: string;
  filter: string;
  selection_type?: "BOX" | "LASSO";
  geometry: GeometryPayload;
  subsample_p: number;
  subsample_seed: number;
  description: string;
  created_at?: string | null;
}

export interface DatasetSummary {
  dataset_id: number;
  description: string;
  created_at: string;
  member_count: number;
  members: string[];
  spec: SpecPayload;
}

export interface SaveResponse {
  dataset_id: number;
  members: string[];
}

export interface DriftBody {
  code: "SelectionDrift";
  message: string;
  server_members: string[];
  client_members: string[];
}

export interface ErrorBody {
  code: string;
  message: string;
}
