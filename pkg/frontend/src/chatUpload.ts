// Chat panel (input disabled while a reply is pending) and the upload panel
// with client-side media-type rejection mirroring the server's list.

import { ApiClient } from "./api";
import { UPLOAD_MEDIA_TYPES } from "./types";

export class ChatPanel {
  private log: HTMLElement;
  private input: HTMLInputElement;
  private send: HTMLButtonElement;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private sessionId: () => string,
  ) {
    this.root.classList.add("chat-panel");
    this.log = document.createElement("ul");
    this.log.className = "chat-log";
    const form = document.createElement("form");
    form.className = "chat-form";
    this.input = document.createElement("input");
    this.input.className = "chat-input";
    this.input.placeholder = "Ask about this case...";
    this.send = document.createElement("button");
    this.send.type = "submit";
    this.send.textContent = "Send";
    form.append(this.input, this.send);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    this.root.append(this.log, form);
  }

  private appendTurn(role: "user" | "assistant", content: string): void {
    const item = document.createElement("li");
    item.className = `chat-turn chat-${role}`;
    item.textContent = content;
    this.log.appendChild(item);
  }

  async submit(): Promise<void> {
    const message = this.input.value.trim();
    if (!message) return;
    this.input.disabled = true;
    this.send.disabled = true;
    this.appendTurn("user", message);
    try {
      const response = await this.api.chat(this.sessionId(), message);
      this.appendTurn("assistant", response.reply);
      this.input.value = "";
    } catch (err) {
      this.appendTurn("assistant", `error: ${err instanceof Error ? err.message : err}`);
    } finally {
      this.input.disabled = false;
      this.send.disabled = false;
    }
  }
}

export class UploadPanel {
  private input: HTMLInputElement;
  private toast: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private sessionId: () => string,
  ) {
    this.root.classList.add("upload-panel");
    this.input = document.createElement("input");
    this.input.type = "file";
    this.input.className = "upload-input";
    this.toast = document.createElement("div");
    this.toast.className = "upload-toast";
    this.toast.hidden = true;
    this.input.addEventListener("change", () => {
      const file = this.input.files?.[0];
      if (file) void this.upload(file);
    });
    this.root.append(this.input, this.toast);
  }

  private showToast(text: string, isError = false): void {
    this.toast.textContent = text;
    this.toast.classList.toggle("error", isError);
    this.toast.hidden = false;
  }

  async upload(file: File): Promise<void> {
    if (!UPLOAD_MEDIA_TYPES.includes(file.type)) {
      // mirror the server's accepted list without a round trip
      this.showToast(`unsupported file type: ${file.type || "unknown"}`, true);
      return;
    }
    try {
      const response = await this.api.uploadFile(this.sessionId(), file);
      this.showToast(`indexed ${response.chunks_added} chunk(s) from ${response.doc_id}`);
    } catch (err) {
      this.showToast(`upload failed: ${err instanceof Error ? err.message : err}`, true);
    }
  }
}
