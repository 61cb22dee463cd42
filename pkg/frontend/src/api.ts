// Thin typed client for the session service.

import type {
  AnalysisResponse,
  ApiErrorBody,
  ChatResponse,
  ReportResponse,
  SessionResponse,
  UploadResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let body: ApiErrorBody = { code: "unknown", message: resp.statusText };
  try {
    body = (await resp.json()) as ApiErrorBody;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, body.code, body.message);
}

async function requestJson<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) throw await parseError(resp);
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private base: string = "") {}

  url(path: string): string {
    return `${this.base}${path}`;
  }

  createSession(): Promise<SessionResponse> {
    return requestJson(this.url("/v1/sessions"), { method: "POST" });
  }

  getSession(sessionId: string): Promise<SessionResponse> {
    return requestJson(this.url(`/v1/sessions/${sessionId}`));
  }

  analyzeImage(sessionId: string, file: File): Promise<AnalysisResponse> {
    const form = new FormData();
    form.append("file", file);
    return requestJson(this.url(`/v1/sessions/${sessionId}/image`), {
      method: "POST",
      body: form,
    });
  }

  patchConcepts(
    sessionId: string,
    overrides: Record<string, number>,
  ): Promise<AnalysisResponse> {
    return requestJson(this.url(`/v1/sessions/${sessionId}/concepts`), {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ overrides }),
    });
  }

  async fetchHeatmap(heatmapUrl: string, w = 448, h = 448): Promise<Blob> {
    const resp = await fetch(this.url(`${heatmapUrl}?w=${w}&h=${h}`));
    if (!resp.ok) throw await parseError(resp);
    return await resp.blob();
  }

  uploadFile(sessionId: string, file: File, docId?: string): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", file);
    if (docId) form.append("doc_id", docId);
    return requestJson(this.url(`/v1/sessions/${sessionId}/uploads`), {
      method: "POST",
      body: form,
    });
  }

  generateReport(sessionId: string): Promise<ReportResponse> {
    return requestJson(this.url(`/v1/sessions/${sessionId}/report`), { method: "POST" });
  }

  chat(sessionId: string, message: string): Promise<ChatResponse> {
    return requestJson(this.url(`/v1/sessions/${sessionId}/chat`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ message }),
    });
  }
}
