// Recorded-backend harness: a fetch stand-in that serves captured responses.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { FetchLike } from "../src/api.js";

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(fixturesDir, name), "utf-8")) as T;
}

export type Route = {
  method: string;
  path: string;
  /** one response per successive call; the last repeats */
  responses: Array<{ status?: number; body: unknown }>;
};

export class RecordedBackend {
  calls: Array<{ method: string; path: string; body: unknown }> = [];
  private counters = new Map<Route, number>();

  constructor(private routes: Route[]) {}

  fetch: FetchLike = async (url, init) => {
    const method = (init?.method ?? "GET").toUpperCase();
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    let requestBody: unknown = null;
    if (typeof init?.body === "string") {
      try {
        requestBody = JSON.parse(init.body);
      } catch {
        requestBody = init.body;
      }
    }
    this.calls.push({ method, path, body: requestBody });
    const route = this.routes.find((r) => r.method === method && r.path === path);
    if (!route) {
      return new Response(JSON.stringify({ detail: "not found" }), { status: 404 });
    }
    const index = this.counters.get(route) ?? 0;
    this.counters.set(route, Math.min(index + 1, route.responses.length - 1));
    const step = route.responses[Math.min(index, route.responses.length - 1)]!;
    return new Response(JSON.stringify(step.body), {
      status: step.status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  };
}
