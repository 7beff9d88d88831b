/** Typed client for the HTTP/JSON service. */

import type {
  DatasetSummary,
  DriftBody,
  MethodSummary,
  RecordRow,
  SaveResponse,
  ScatterPoint,
  SpecPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly body: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class DriftError extends ApiError {
  constructor(readonly drift: DriftBody) {
    super(409, drift.code, drift.message, drift);
    this.name = "DriftError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (resp.status === 204) return undefined as T;
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    if (resp.status === 409 && body && body.code === "SelectionDrift") {
      throw new DriftError(body as DriftBody);
    }
    const code = body?.code ?? "HttpError";
    const message = body?.message ?? `${resp.status} for ${url}`;
    throw new ApiError(resp.status, code, message, body);
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly base = "") {}

  getParams(): Promise<{ params: string[] }> {
    return request(`${this.base}/api/params`);
  }

  listMethods(): Promise<MethodSummary[]> {
    return request(`${this.base}/api/methods`);
  }

  getRecords(
    method: number,
    t: number,
    signal?: AbortSignal,
  ): Promise<RecordRow[]> {
    return request(`${this.base}/api/records?method=${method}&t=${t}`, { signal });
  }

  getScatter(
    method: number,
    t: number,
    ws: number,
    we: number,
    signal?: AbortSignal,
  ): Promise<ScatterPoint[]> {
    return request(
      `${this.base}/api/scatter?method=${method}&t=${t}&ws=${ws}&we=${we}`,
      { signal },
    );
  }

  /** Pass null for clientIds when the client cannot predict membership
   * (subsampling); the server then skips the drift check. */
  saveDataset(
    spec: SpecPayload,
    clientIds: string[] | null,
  ): Promise<SaveResponse> {
    return request(`${this.base}/api/datasets`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ spec, client_selected_ids: clientIds }),
    });
  }

  listDatasets(): Promise<DatasetSummary[]> {
    return request(`${this.base}/api/datasets`);
  }

  getDataset(id: number): Promise<DatasetSummary> {
    return request(`${this.base}/api/datasets/${id}`);
  }

  getSettings(id: number): Promise<SpecPayload> {
    return request(`${this.base}/api/datasets/${id}/settings`);
  }

  deleteDataset(id: number): Promise<void> {
    return request(`${this.base}/api/datasets/${id}`, { method: "DELETE" });
  }

  exportDataset(id: number): Promise<unknown> {
    return request(`${this.base}/api/datasets/${id}/export`);
  }
}
