// Editable concept list: rows in server order (|contribution| descending),
// score sliders issuing minimal-diff PATCHes, heatmap toggles driving the
// overlay stack. State changes only from server responses.

import { ApiClient, ApiError } from "./api";
import type { HeatmapRenderer } from "./overlay";
import type { AnalysisResponse, ConceptRow, PredictionPayload } from "./types";

export const PATCH_DEBOUNCE_MS = 300;

export class PredictionBanner {
  private label: HTMLElement;
  private probability: HTMLElement;
  private flag: HTMLElement;
  private lastLabel: string | null = null;

  constructor(private root: HTMLElement) {
    this.root.classList.add("prediction-banner");
    this.label = document.createElement("span");
    this.label.className = "prediction-label";
    this.probability = document.createElement("span");
    this.probability.className = "prediction-probability";
    this.flag = document.createElement("span");
    this.flag.className = "prediction-flag";
    this.flag.hidden = true;
    this.flag.textContent = "class changed";
    this.root.append(this.label, this.probability, this.flag);
  }

  update(prediction: PredictionPayload): void {
    const label = prediction.predicted_label;
    const probability = prediction.probabilities[label];
    this.label.textContent = label;
    this.probability.textContent = `p=${probability.toFixed(3)}`;
    const changed = this.lastLabel !== null && this.lastLabel !== label;
    this.flag.hidden = !changed;
    this.lastLabel = label;
  }
}

interface RowElements {
  row: HTMLElement;
  slider: HTMLInputElement;
  scoreText: HTMLElement;
  contributionText: HTMLElement;
  toggle: HTMLInputElement;
  error: HTMLElement;
}

export class ConceptPanel {
  private rows = new Map<string, RowElements>();
  private accepted = new Map<string, number>(); // last server-accepted score per concept
  private pending = new Map<string, number>();
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: Promise<void> = Promise.resolve(); // one mutation at a time
  private sessionId = "";

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private renderer: HeatmapRenderer,
    private banner: PredictionBanner,
    private debounceMs: number = PATCH_DEBOUNCE_MS,
  ) {
    this.root.classList.add("concept-panel");
  }

  render(analysis: AnalysisResponse): void {
    this.sessionId = analysis.session_id;
    this.root.replaceChildren();
    this.rows.clear();
    this.accepted.clear();
    const list = document.createElement("ul");
    list.className = "concept-list";
    for (const concept of analysis.concepts) {
      list.appendChild(this.buildRow(concept));
      this.accepted.set(concept.id, concept.score);
    }
    this.root.appendChild(list);
    this.banner.update(analysis.prediction);
  }

  private buildRow(concept: ConceptRow): HTMLElement {
    const row = document.createElement("li");
    row.className = "concept-row";
    row.dataset.conceptId = concept.id;

    const name = document.createElement("span");
    name.className = "concept-name";
    name.textContent = concept.name;

    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = String(concept.score);
    slider.className = "concept-slider";

    const scoreText = document.createElement("span");
    scoreText.className = "concept-score";
    scoreText.textContent = concept.score.toFixed(2);

    const contributionText = document.createElement("span");
    contributionText.className = "concept-contribution";
    contributionText.textContent = formatContribution(concept.contribution);

    const toggle = document.createElement("input");
    toggle.type = "checkbox";
    toggle.className = "heatmap-toggle";
    toggle.title = "show saliency heatmap";

    const error = document.createElement("span");
    error.className = "row-error";
    error.hidden = true;

    slider.addEventListener("input", () => {
      this.queueEdit(concept.id, Number(slider.value));
    });
    toggle.addEventListener("change", () => {
      void this.onToggle(concept, toggle, error);
    });

    row.append(name, slider, scoreText, contributionText, toggle, error);
    this.rows.set(concept.id, { row, slider, scoreText, contributionText, toggle, error });
    return row;
  }

  private queueEdit(conceptId: string, score: number): void {
    this.pending.set(conceptId, score);
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      void this.flushEdits();
    }, this.debounceMs);
  }

  flushEdits(): Promise<void> {
    this.inflight = this.inflight.then(() => this.patchPending());
    return this.inflight;
  }

  private async patchPending(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.pending.size === 0) return;
    const overrides = Object.fromEntries(this.pending);
    this.pending.clear();
    try {
      const response = await this.api.patchConcepts(this.sessionId, overrides);
      this.applyResponse(response);
    } catch (err) {
      if (err instanceof ApiError) {
        // revert the sliders to the last accepted values
        for (const conceptId of Object.keys(overrides)) {
          const elements = this.rows.get(conceptId);
          const accepted = this.accepted.get(conceptId);
          if (elements && accepted !== undefined) {
            elements.slider.value = String(accepted);
            elements.error.textContent = err.message;
            elements.error.hidden = false;
          }
        }
        return;
      }
      throw err;
    }
  }

  private applyResponse(response: AnalysisResponse): void {
    for (const concept of response.concepts) {
      const elements = this.rows.get(concept.id);
      if (!elements) continue;
      elements.slider.value = String(concept.score);
      elements.scoreText.textContent = concept.score.toFixed(2);
      elements.contributionText.textContent = formatContribution(concept.contribution);
      elements.error.hidden = true;
      elements.row.classList.toggle("overridden", concept.overridden);
      this.accepted.set(concept.id, concept.score);
    }
    this.banner.update(response.prediction);
  }

  private async onToggle(
    concept: ConceptRow,
    toggle: HTMLInputElement,
    error: HTMLElement,
  ): Promise<void> {
    if (!toggle.checked) {
      this.renderer.remove(concept.id);
      return;
    }
    try {
      const blob = await this.api.fetchHeatmap(concept.heatmap_url);
      await this.renderer.add(blob, concept.id);
      error.hidden = true;
    } catch (err) {
      toggle.checked = false;
      error.textContent = err instanceof Error ? err.message : String(err);
      error.hidden = false;
    }
  }
}

function formatContribution(value: number): string {
  const sign = value >= 0 ? "+" : "";
  return `${sign}${value.toFixed(3)}`;
}
