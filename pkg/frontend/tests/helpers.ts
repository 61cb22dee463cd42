// Shared test scaffolding: a stubbed fetch-backed service and a recording
// overlay renderer.

import { vi } from "vitest";
import type { HeatmapRenderer } from "../src/overlay";
import type { AnalysisResponse, ConceptRow, PredictionPayload } from "../src/types";

export function prediction(label: string, probability = 0.8): PredictionPayload {
  const labels = ["Pneumonia", "COVID-19", "Normal"];
  const rest = (1 - probability) / 2;
  return {
    predicted_label: label,
    probabilities: Object.fromEntries(
      labels.map((name) => [name, name === label ? probability : rest]),
    ),
    logits: Object.fromEntries(labels.map((name) => [name, name === label ? 2 : 0])),
  };
}

export function conceptRow(
  id: string,
  contribution: number,
  score = 0.5,
  overridden = false,
): ConceptRow {
  return {
    id,
    name: `Concept ${id}`,
    score,
    contribution,
    overridden,
    heatmap_url: `/v1/sessions/s1/heatmaps/${id}`,
  };
}

export function analysis(concepts: ConceptRow[], label = "Pneumonia"): AnalysisResponse {
  return { session_id: "s1", prediction: prediction(label), concepts };
}

export interface StubCall {
  url: string;
  method: string;
  body: unknown;
}

/** Install a fetch stub; the handler maps (url, init) to a response value. */
export function stubFetch(
  handler: (url: string, init?: RequestInit) => { status?: number; json?: unknown; blob?: Blob },
): StubCall[] {
  const calls: StubCall[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      let body: unknown = null;
      if (typeof init?.body === "string") body = JSON.parse(init.body);
      calls.push({ url: String(url), method: init?.method ?? "GET", body });
      const result = handler(String(url), init);
      const status = result.status ?? 200;
      return {
        ok: status >= 200 && status < 300,
        status,
        statusText: String(status),
        json: async () => result.json ?? {},
        blob: async () => result.blob ?? new Blob(["png"]),
      } as unknown as Response;
    }),
  );
  return calls;
}

export class FakeRenderer implements HeatmapRenderer {
  added: string[] = [];
  removed: string[] = [];

  async add(_blob: Blob, conceptId: string): Promise<void> {
    this.added.push(conceptId);
  }

  remove(conceptId: string): void {
    this.removed.push(conceptId);
  }
}
