import type { ChatResponse, EvalRecord, SourceCard } from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = `HTTP ${response.status}`;
  let message = response.statusText;
  try {
    const body = await response.json();
    const detail = body?.detail;
    if (detail?.code) {
      code = detail.code;
      message = detail.message ?? message;
    } else if (typeof detail === "string") {
      message = detail;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private baseUrl = "") {}

  async chat(
    query: string,
    sessionId: string | null,
    opts: { n?: number; k?: number; alpha?: number } = {},
  ): Promise<ChatResponse> {
    const payload: Record<string, unknown> = { query, ...opts };
    if (sessionId) payload.session_id = sessionId;
    const response = await fetch(`${this.baseUrl}/api/chat`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    await raiseForStatus(response);
    return response.json();
  }

  async upload(file: File, sessionId: string | null): Promise<{ upload_id: string; session_id: string }> {
    const form = new FormData();
    form.append("file", file);
    if (sessionId) form.append("session_id", sessionId);
    const response = await fetch(`${this.baseUrl}/api/upload`, { method: "POST", body: form });
    await raiseForStatus(response);
    return response.json();
  }

  async submitEval(record: EvalRecord): Promise<void> {
    const response = await fetch(`${this.baseUrl}/api/eval`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(record),
    });
    await raiseForStatus(response);
  }

  async meta(docId: string): Promise<SourceCard> {
    const response = await fetch(`${this.baseUrl}/api/documents/${docId}/meta`);
    await raiseForStatus(response);
    return response.json();
  }

  documentUrl(docId: string, lang: string): string {
    return `${this.baseUrl}/api/documents/${docId}?lang=${encodeURIComponent(lang)}`;
  }

  historyUrl(sessionId: string, format: "json" | "markdown"): string {
    return `${this.baseUrl}/api/history/${sessionId}?format=${format}`;
  }

  async history(sessionId: string): Promise<unknown[]> {
    const response = await fetch(this.historyUrl(sessionId, "json"));
    await raiseForStatus(response);
    return response.json();
  }
}
