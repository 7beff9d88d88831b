/** In-memory stand-in for the HTTP service, implementing the same
 * replay semantics (filter -> projection -> geometry -> subsample) so
 * round-trip behavior can be tested without a real backend. */

import { applyFilter, parseFilter } from "../src/filter.js";
import { geometryFromPayload, selectIds } from "../src/geometry.js";
import { scatterPoints } from "../src/points.js";
import type {
  DatasetSummary,
  MethodSummary,
  RecordRow,
  SpecPayload,
} from "../src/types.js";

export const PARAMS = ["profile", "s1", "cs", "mgrg", "s2", "rho0", "tshift"];

export function makeRows(t: number): RecordRow[] {
  const rows: RecordRow[] = [];
  for (let i = 0; i < 8; i++) {
    const profile = i % 2;
    const s1 = Math.floor(i / 2) % 2;
    const cs = Math.floor(i / 4) % 2;
    rows.push({
      sim_id: `sim_${String(i).padStart(4, "0")}`,
      time_step: t,
      dshock: 0.05 * i * t,
      dedge: 0.02 * ((i * 3) % 5) * t,
      drho: 0.1 * ((i * 7) % 8) * t + profile,
      invalid: false,
      profile,
      s1,
      cs,
      mgrg: 0,
      s2: 0,
      rho0: 0,
      tshift: 0,
    });
  }
  return rows;
}

/** Deterministic stand-in for the server's keyed-hash subsample. */
function keepFraction(seed: number, simId: string): number {
  let h = seed >>> 0;
  for (const ch of simId) {
    h = Math.imul(h ^ ch.charCodeAt(0), 0x01000193) >>> 0;
  }
  // avalanche so ids differing in one character spread over [0, 1)
  h ^= h >>> 16;
  h = Math.imul(h, 0x85ebca6b) >>> 0;
  h ^= h >>> 13;
  h = Math.imul(h, 0xc2b2ae35) >>> 0;
  h ^= h >>> 16;
  return (h >>> 0) / 0x100000000;
}

function replay(spec: SpecPayload): string[] {
  const rows = applyFilter(makeRows(spec.time_step), parseFilter(spec.filter, PARAMS));
  const points = scatterPoints(rows, spec.w_shock, spec.w_edge);
  const selected = [...selectIds(points, geometryFromPayload(spec.geometry))].sort();
  return selected.filter(
    (id) => keepFraction(spec.subsample_seed, id) < spec.subsample_p,
  );
}

interface StoredDataset {
  dataset_id: number;
  members: string[];
  spec: SpecPayload;
}

export class MockServer {
  datasets = new Map<number, StoredDataset>();
  requests: { method: string; url: string; body?: unknown }[] = [];
  private nextId = 1;
  methods: MethodSummary[] = [
    {
      method_id: 1,
      gt_id: 1,
      gt_sim_id: "sim_0000",
      gt_time_step: 4,
      norm: "L2",
      description: "test method",
    },
  ];

  fetch = async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, url, body });
    const respond = (status: number, payload: unknown) =>
      ({
        ok: status >= 200 && status < 300,
        status,
        json: async () => payload,
      }) as Response;

    const u = new URL(url, "http://test");
    if (u.pathname === "/api/params") return respond(200, { params: PARAMS });
    if (u.pathname === "/api/methods") return respond(200, this.methods);
    if (u.pathname === "/api/records") {
      const t = Number(u.searchParams.get("t"));
      if (t < 1 || t > 4) {
        return respond(422, { code: "ValidationError", message: `bad time step ${t}` });
      }
      return respond(200, makeRows(t));
    }
    if (u.pathname === "/api/datasets" && method === "POST") {
      const spec = body.spec as SpecPayload;
      if (!spec.description.trim()) {
        return respond(422, { code: "ValidationError", message: "description required" });
      }
      const members = replay(spec);
      if (members.length === 0) {
        return respond(422, { code: "EmptySelection", message: "no members" });
      }
      const client = body.client_selected_ids as string[] | null;
      if (client !== null && client !== undefined) {
        const sortedClient = [...client].sort();
        if (JSON.stringify(sortedClient) !== JSON.stringify(members)) {
          return respond(409, {
            code: "SelectionDrift",
            message: "client selection disagrees with server replay",
            server_members: members,
            client_members: sortedClient,
          });
        }
      }
      const id = this.nextId++;
      const stored: StoredDataset = {
        dataset_id: id,
        members,
        spec: { ...spec, created_at: "2026-01-01T00:00:00+00:00" },
      };
      this.datasets.set(id, stored);
      return respond(201, { dataset_id: id, members });
    }
    if (u.pathname === "/api/datasets" && method === "GET") {
      return respond(200, [...this.datasets.values()].map(summarize));
    }
    const m = u.pathname.match(/^\/api\/datasets\/(\d+)(\/settings|\/export)?$/);
    if (m) {
      const id = Number(m[1]);
      const ds = this.datasets.get(id);
      if (!ds) return respond(404, { code: "NotFound", message: `dataset ${id}` });
      if (method === "DELETE") {
        this.datasets.delete(id);
        return { ok: true, status: 204, json: async () => null } as Response;
      }
      if (m[2] === "/settings") return respond(200, ds.spec);
      if (m[2] === "/export") {
        return respond(200, { dataset_id: id, members: ds.members, spec: ds.spec });
      }
      return respond(200, summarize(ds));
    }
    return respond(404, { code: "NotFound", message: url });
  };
}

function summarize(ds: StoredDataset): DatasetSummary {
  return {
    dataset_id: ds.dataset_id,
    description: ds.spec.description,
    created_at: ds.spec.created_at ?? "",
    member_count: ds.members.length,
    members: ds.members,
    spec: ds.spec,
  };
}
