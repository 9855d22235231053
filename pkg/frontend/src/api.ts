import type {
  GenerateSummary,
  ModelInfo,
  OptimizeReport,
  Params,
  SessionInfo,
  SliceStackJson,
} from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

/** Thin typed client for the foam service; `baseUrl` is the only setting. */
export class ApiClient {
  constructor(
    public baseUrl = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + url, init);
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return (await resp.json()) as T;
  }

  uploadModel(file: File | Blob, filename: string): Promise<ModelInfo> {
    const form = new FormData();
    form.append("file", file, filename);
    return this.json<ModelInfo>("/api/models", { method: "POST", body: form });
  }

  createSession(modelId: string): Promise<SessionInfo> {
    return this.json<SessionInfo>("/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ model_id: modelId }),
    });
  }

  patchParams(sessionId: string, params: Partial<Params>): Promise<Response> {
    return this.fetchImpl(this.baseUrl + `/api/sessions/${sessionId}/params`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(params),
    });
  }

  generate(sessionId: string): Promise<Response> {
    return this.fetchImpl(this.baseUrl + `/api/sessions/${sessionId}/generate`, {
      method: "POST",
    });
  }

  optimizeAngle(sessionId: string): Promise<Response> {
    return this.fetchImpl(this.baseUrl + `/api/sessions/${sessionId}/optimize-angle`, {
      method: "POST",
    });
  }

  getSlices(sessionId: string): Promise<SliceStackJson> {
    return this.json<SliceStackJson>(`/api/sessions/${sessionId}/slices`);
  }

  sliceSvgUrl(sessionId: string, layer: number): string {
    return this.baseUrl + `/api/sessions/${sessionId}/slices/${layer}.svg`;
  }

  async fetchSliceSvg(sessionId: string, layer: number): Promise<string> {
    const resp = await this.fetchImpl(this.sliceSvgUrl(sessionId, layer));
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return await resp.text();
  }

  foamUrl(sessionId: string, side: "plus" | "minus", ext: "stl" | "ply"): string {
    return this.baseUrl + `/api/sessions/${sessionId}/foam/${side}.${ext}`;
  }

  async fetchFoamMesh(sessionId: string, side: "plus" | "minus"): Promise<ArrayBuffer> {
    const resp = await this.fetchImpl(this.foamUrl(sessionId, side, "stl"));
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return await resp.arrayBuffer();
  }
}

export type { GenerateSummary, ModelInfo, OptimizeReport, Params, SessionInfo, SliceStackJson };
