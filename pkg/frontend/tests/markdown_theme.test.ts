import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { createApp } from "../src/app";
import { renderMarkdown } from "../src/markdown";
import chatResponse from "./fixtures/chat_response.json";
import { installMockServer } from "./mock_server";

beforeEach(() => {
  localStorage.clear();
  document.body.innerHTML = '<div id="app"></div>';
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("markdown rendering", () => {
  it("renders headings, lists, emphasis and code", () => {
    const html = renderMarkdown("## Title\n\n- one\n- two\n\n**bold** and `code`");
    expect(html).toContain("<h2>Title</h2>");
    expect(html).toContain("<li>one</li>");
    expect(html).toContain("<strong>bold</strong>");
    expect(html).toContain("<code>code</code>");
  });

  it("strips script tags and event handlers from hostile markdown", () => {
    const hostile = 'hi <script>window.__pwned = true;</script> <img src="x" onerror="window.__pwned = true"> <a href="javascript:alert(1)">x</a>';
    const html = renderMarkdown(hostile);
    expect(html).not.toContain("<script");
    expect(html).not.toContain("onerror");
    expect(html).not.toContain("javascript:");
    expect((window as any).__pwned).toBeUndefined();
  });

  it("never executes hostile answer content end to end", async () => {
    const poisoned = {
      ...chatResponse,
      answer: 'hello <script>window.__pwned = true;</script> there\n\n**safe**',
    };
    installMockServer([{ method: "POST", path: "/api/chat", body: poisoned }]);
    const app = createApp(document.getElementById("app")!);
    await app.send("q");
    expect((window as any).__pwned).toBeUndefined();
    const assistant = document.querySelector(".message.assistant")!;
    expect(assistant.innerHTML).not.toContain("<script");
    expect(assistant.querySelector("strong")?.textContent).toBe("safe");
  });
});

describe("theme persistence", () => {
  it("dark mode survives reload", () => {
    const root = document.getElementById("app")!;
    createApp(root);
    expect(root.classList.contains("dark")).toBe(false);
    (root.querySelector(".theme-toggle") as HTMLButtonElement).click();
    expect(root.classList.contains("dark")).toBe(true);
    expect(localStorage.getItem("resqa-theme")).toBe("dark");

    // simulate a reload: fresh DOM, same localStorage
    document.body.innerHTML = '<div id="app"></div>';
    const reloaded = document.getElementById("app")!;
    createApp(reloaded);
    expect(reloaded.classList.contains("dark")).toBe(true);
  });

  it("toggling back persists light mode", () => {
    localStorage.setItem("resqa-theme", "dark");
    const root = document.getElementById("app")!;
    createApp(root);
    expect(root.classList.contains("dark")).toBe(true);
    (root.querySelector(".theme-toggle") as HTMLButtonElement).click();
    expect(localStorage.getItem("resqa-theme")).toBe("light");
  });
});

describe("upload", () => {
  it("posts the file and reports attachment", async () => {
    const { calls } = installMockServer([
      { method: "POST", path: "/api/upload", body: { upload_id: "u123", session_id: "s1" } },
    ]);
    const root = document.getElementById("app")!;
    const app = createApp(root);
    const input = root.querySelector(".pdf-input") as HTMLInputElement;
    const file = new File([new Uint8Array([0x25, 0x50, 0x44, 0x46])], "notes.pdf", {
      type: "application/pdf",
    });
    Object.defineProperty(input, "files", { value: [file] });
    input.dispatchEvent(new Event("change", { bubbles: true }));
    await vi.waitFor(() => {
      expect(root.querySelector(".upload-status")!.textContent).toBe("Attached: notes.pdf");
    });
    expect(calls[0].url).toContain("/api/upload");
    expect(app.sessionId).toBe("s1");
  });
});
