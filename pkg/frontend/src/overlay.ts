// Heatmap overlay rendering. The service ships grayscale PNGs; the color ramp
// (blue -> red) is applied client-side on a canvas. Multiple overlays blend
// additively ("lighter") and clamp at white.

export interface HeatmapRenderer {
  /** Draw one heatmap blob onto the overlay stack. Returns a disposer. */
  add(blob: Blob, conceptId: string): Promise<void>;
  remove(conceptId: string): void;
}

export function blueRedRamp(gray: number): [number, number, number] {
  // gray in [0, 255]: cold blue at 0 through violet to warm red at 255
  return [gray, 0, 255 - gray];
}

export class CanvasOverlayRenderer implements HeatmapRenderer {
  private layers = new Map<string, HTMLCanvasElement>();

  constructor(
    private container: HTMLElement,
    private opacity = 0.5,
  ) {}

  async add(blob: Blob, conceptId: string): Promise<void> {
    const bitmap = await createImageBitmap(blob);
    const canvas = document.createElement("canvas");
    canvas.width = bitmap.width;
    canvas.height = bitmap.height;
    canvas.className = "heatmap-layer";
    canvas.dataset.conceptId = conceptId;
    canvas.style.opacity = String(this.opacity);
    canvas.style.mixBlendMode = "plus-lighter"; // additive blending, clamped
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    ctx.drawImage(bitmap, 0, 0);
    const image = ctx.getImageData(0, 0, canvas.width, canvas.height);
    const pixels = image.data;
    for (let i = 0; i < pixels.length; i += 4) {
      const [r, g, b] = blueRedRamp(pixels[i]);
      pixels[i] = r;
      pixels[i + 1] = g;
      pixels[i + 2] = b;
    }
    ctx.putImageData(image, 0, 0);
    this.remove(conceptId);
    this.layers.set(conceptId, canvas);
    this.container.appendChild(canvas);
  }

  remove(conceptId: string): void {
    const existing = this.layers.get(conceptId);
    if (existing) {
      existing.remove();
      this.layers.delete(conceptId);
    }
  }
}
