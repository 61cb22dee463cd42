// Wires the panels to one service session: upload a chest X-ray, inspect and
// edit concepts with heatmap overlays, generate the report, chat.

import { ApiClient } from "./api";
import { ChatPanel, UploadPanel } from "./chatUpload";
import { ConceptPanel, PredictionBanner } from "./conceptPanel";
import { CanvasOverlayRenderer } from "./overlay";
import { ReportView } from "./reportView";

const API_BASE = import.meta.env?.VITE_API_BASE ?? "";

function element(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found;
}

async function bootstrap(): Promise<void> {
  const api = new ApiClient(API_BASE);
  const session = await api.createSession();
  let sessionId = session.id;

  const imageStage = element("image-stage");
  const renderer = new CanvasOverlayRenderer(element("overlay-stack"));
  const banner = new PredictionBanner(element("banner"));
  const conceptPanel = new ConceptPanel(element("concepts"), api, renderer, banner);
  const reportView = new ReportView(element("report"), api);
  new ChatPanel(element("chat"), api, () => sessionId);
  new UploadPanel(element("uploads"), api, () => sessionId);

  const imageInput = element("image-input") as HTMLInputElement;
  imageInput.addEventListener("change", async () => {
    const file = imageInput.files?.[0];
    if (!file) return;
    if (file.type !== "image/png" && file.type !== "image/jpeg") {
      element("image-error").textContent = "upload a PNG or JPEG chest X-ray";
      return;
    }
    element("image-error").textContent = "";
    const preview = element("image-preview") as HTMLImageElement;
    preview.src = URL.createObjectURL(file);
    imageStage.hidden = false;
    const analysis = await api.analyzeImage(sessionId, file);
    conceptPanel.render(analysis);
    element("report-button").removeAttribute("disabled");
  });

  element("report-button").addEventListener("click", () => {
    void reportView.generate(sessionId);
  });
}

void bootstrap();
