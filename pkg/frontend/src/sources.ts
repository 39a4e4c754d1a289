import { escapeText } from "./markdown";
import type { SourceCard } from "./types";

/** Render source cards: title, id, date, green subject chips, language links. */
export function renderSourceCards(
  container: HTMLElement,
  sources: SourceCard[],
  onOpen: (docId: string, lang: string) => void,
): void {
  container.innerHTML = "";
  for (const source of sources) {
    const card = document.createElement("div");
    card.className = "source-card";
    card.dataset.docId = source.doc_id;

    const title = document.createElement("div");
    title.className = "source-title";
    title.textContent = source.title;
    card.appendChild(title);

    const meta = document.createElement("div");
    meta.className = "source-meta";
    meta.textContent = `${source.doc_id} · ${source.date}`;
    card.appendChild(meta);

    const subjects = document.createElement("div");
    subjects.className = "source-subjects";
    for (const subject of source.subjects) {
      const chip = document.createElement("span");
      chip.className = "subject-tag";
      chip.textContent = subject;
      subjects.appendChild(chip);
    }
    card.appendChild(subjects);

    const langs = document.createElement("div");
    langs.className = "source-langs";
    for (const lang of source.languages) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "lang-chip";
      button.textContent = lang;
      button.dataset.docId = source.doc_id;
      button.dataset.lang = lang;
      button.addEventListener("click", () => onOpen(source.doc_id, lang));
      langs.appendChild(button);
    }
    card.appendChild(langs);
    container.appendChild(card);
  }
  if (!sources.length) {
    container.innerHTML = `<p class="sources-empty">${escapeText("No sources yet.")}</p>`;
  }
}
