import { ApiClient, ApiError } from "./api";
import { renderEvalForm } from "./evalform";
import { escapeText, renderMarkdown } from "./markdown";
import { renderSourceCards } from "./sources";
import { applyTheme, loadTheme, toggleTheme } from "./theme";
import type { AppConfig, SourceCard } from "./types";

const LAYOUT = `
  <header class="banner">
    <h1>Resolution archive Q&amp;A</h1>
    <div class="banner-buttons">
      <a class="download-json" download hidden>History (JSON)</a>
      <a class="download-md" download hidden>History (Markdown)</a>
      <button type="button" class="theme-toggle">Dark mode</button>
    </div>
  </header>
  <div class="layout">
    <aside class="viewer-panel hidden">
      <iframe class="viewer-frame" title="document viewer"></iframe>
    </aside>
    <main class="chat-panel">
      <div class="error-banner hidden" role="alert"></div>
      <div class="messages"></div>
      <form class="chat-form">
        <textarea class="chat-input" placeholder="Ask about the archived resolutions..."></textarea>
        <button type="submit" class="send-button">Send</button>
      </form>
      <div class="upload-row">
        <input type="file" class="pdf-input" accept="application/pdf">
        <span class="upload-status"></span>
      </div>
    </main>
    <aside class="sources-panel">
      <div class="sources-header">
        <span>Sources</span>
        <button type="button" class="eval-toggle">Eval</button>
      </div>
      <div class="source-cards"></div>
      <div class="eval-panel hidden"></div>
    </aside>
  </div>
`;

export interface App {
  root: HTMLElement;
  sessionId: string | null;
  busy: boolean;
  sources: SourceCard[];
  send(text: string): Promise<void>;
  openViewer(docId: string, lang: string): void;
  closeViewer(): void;
}

export function createApp(root: HTMLElement, config: AppConfig = {}): App {
  const api = new ApiClient(config.baseUrl ?? "");
  root.classList.add("app");
  root.innerHTML = LAYOUT;
  applyTheme(root, loadTheme());

  const query = (selector: string): HTMLElement => {
    const node = root.querySelector(selector);
    if (!node) throw new Error(`missing element: ${selector}`);
    return node as HTMLElement;
  };
  const messages = query(".messages");
  const input = query(".chat-input") as HTMLTextAreaElement;
  const sendButton = query(".send-button") as HTMLButtonElement;
  const errorBanner = query(".error-banner");
  const cardsContainer = query(".source-cards");
  const viewerPanel = query(".viewer-panel");
  const viewerFrame = query(".viewer-frame") as HTMLIFrameElement;
  const evalPanel = query(".eval-panel");
  const uploadInput = query(".pdf-input") as HTMLInputElement;
  const uploadStatus = query(".upload-status");
  const downloadJson = query(".download-json") as HTMLAnchorElement;
  const downloadMd = query(".download-md") as HTMLAnchorElement;

  const app: App = {
    root,
    sessionId: null,
    busy: false,
    sources: [],
    send,
    openViewer,
    closeViewer,
  };

  function setBusy(value: boolean): void {
    app.busy = value;
    sendButton.disabled = value;
    uploadInput.disabled = value;
    root.classList.toggle("busy", value);
  }

  function showError(code: string, message: string): void {
    errorBanner.textContent = `${code}: ${message}`;
    errorBanner.classList.remove("hidden");
  }

  function appendMessage(role: "user" | "assistant", body: string): void {
    const div = document.createElement("div");
    div.className = `message ${role}`;
    div.innerHTML = role === "assistant" ? renderMarkdown(body) : escapeText(body);
    messages.appendChild(div);
    messages.scrollTop = messages.scrollHeight;
  }

  function refreshDownloads(): void {
    if (!app.sessionId) return;
    downloadJson.href = api.historyUrl(app.sessionId, "json");
    downloadMd.href = api.historyUrl(app.sessionId, "markdown");
    downloadJson.hidden = false;
    downloadMd.hidden = false;
  }

  async function send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || app.busy) return;
    errorBanner.classList.add("hidden");
    setBusy(true);
    try {
      const response = await api.chat(trimmed, app.sessionId);
      app.sessionId = response.session_id;
      appendMessage("user", trimmed);
      appendMessage("assistant", response.answer);
      app.sources = response.sources;
      renderSourceCards(cardsContainer, app.sources, openViewer);
      if (!evalPanel.classList.contains("hidden")) renderEval();
      refreshDownloads();
      input.value = "";
    } catch (error) {
      if (error instanceof ApiError) {
        showError(error.code, error.message);
      } else {
        showError("Error", error instanceof Error ? error.message : String(error));
      }
      // input text is left untouched so the user can retry
    } finally {
      setBusy(false);
    }
  }

  function openViewer(docId: string, lang: string): void {
    const card = app.sources.find((s) => s.doc_id === docId);
    if (!card || !card.languages.includes(lang)) return;
    viewerFrame.src = api.documentUrl(docId, lang);
    viewerPanel.classList.remove("hidden");
  }

  function closeViewer(): void {
    viewerPanel.classList.add("hidden");
    viewerFrame.removeAttribute("src");
  }

  function renderEval(): void {
    renderEvalForm(evalPanel, {
      sources: app.sources,
      retrieverTag: config.retrieverTag ?? "unknown-retriever",
      generatorTag: config.generatorTag ?? "unknown-generator",
      onSubmit: (record) => api.submitEval(record),
    });
  }

  query(".chat-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void send(input.value);
  });

  query(".theme-toggle").addEventListener("click", () => toggleTheme(root));

  query(".eval-toggle").addEventListener("click", () => {
    const hidden = evalPanel.classList.toggle("hidden");
    if (!hidden) renderEval();
  });

  uploadInput.addEventListener("change", async () => {
    const file = uploadInput.files?.[0];
    if (!file || app.busy) return;
    setBusy(true);
    try {
      const result = await api.upload(file, app.sessionId);
      app.sessionId = result.session_id;
      uploadStatus.textContent = `Attached: ${file.name}`;
      refreshDownloads();
    } catch (error) {
      if (error instanceof ApiError) showError(error.code, error.message);
      uploadStatus.textContent = "";
    } finally {
      setBusy(false);
      uploadInput.value = "";
    }
  });

  // The document viewer closes on a click anywhere outside it.
  root.addEventListener("click", (event) => {
    if (viewerPanel.classList.contains("hidden")) return;
    const target = event.target as HTMLElement;
    if (target.closest(".viewer-panel") || target.closest(".lang-chip")) return;
    closeViewer();
  });

  renderSourceCards(cardsContainer, [], openViewer);
  return app;
}
