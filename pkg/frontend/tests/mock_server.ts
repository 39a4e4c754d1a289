/** Fetch stub replaying responses recorded from the real backend. */

import { vi } from "vitest";

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface Route {
  method: string;
  path: string | RegExp;
  status?: number;
  body: unknown;
}

export function installMockServer(routes: Route[]) {
  const calls: RecordedCall[] = [];
  const fetchMock = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = (init?.method ?? "GET").toUpperCase();
    let parsed: unknown = null;
    if (typeof init?.body === "string") {
      try {
        parsed = JSON.parse(init.body);
      } catch {
        parsed = init.body;
      }
    } else if (init?.body instanceof FormData) {
      parsed = Object.fromEntries(init.body.entries());
    }
    calls.push({ url, method, body: parsed });
    const route = routes.find(
      (r) =>
        r.method === method &&
        (typeof r.path === "string" ? url.includes(r.path) : r.path.test(url)),
    );
    if (!route) {
      return new Response(JSON.stringify({ detail: { code: "NotFound", message: url } }), {
        status: 404,
        headers: { "Content-Type": "application/json" },
      });
    }
    return new Response(JSON.stringify(route.body), {
      status: route.status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  });
  vi.stubGlobal("fetch", fetchMock);
  return { calls, fetchMock };
}
