const STORAGE_KEY = "resqa-theme";

export type Theme = "light" | "dark";

export function loadTheme(): Theme {
  return localStorage.getItem(STORAGE_KEY) === "dark" ? "dark" : "light";
}

export function applyTheme(root: HTMLElement, theme: Theme): void {
  root.classList.toggle("dark", theme === "dark");
}

/** Flip, persist, and apply; returns the new theme. */
export function toggleTheme(root: HTMLElement): Theme {
  const next: Theme = root.classList.contains("dark") ? "light" : "dark";
  localStorage.setItem(STORAGE_KEY, next);
  applyTheme(root, next);
  return next;
}
