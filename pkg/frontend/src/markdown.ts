import DOMPurify from "dompurify";
import { marked } from "marked";

marked.setOptions({ async: false, gfm: true });

/** Markdown to sanitized HTML; script content and event handlers never survive. */
export function renderMarkdown(source: string): string {
  const html = marked.parse(source) as string;
  return DOMPurify.sanitize(html, { USE_PROFILES: { html: true } });
}

export function escapeText(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}
