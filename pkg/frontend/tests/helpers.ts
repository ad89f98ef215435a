/**
 * Shared plumbing for contract tests: fixture loading and a canned fetch.
 *
 * Fixtures under tests/fixtures/ are recorded verbatim from a running
 * service, so asserting the UI against them asserts the UI against the wire
 * format without needing the Python side installed.
 */

import { readFileSync } from "node:fs";
import type { FetchLike } from "../src/api.js";

export function fixture<T>(name: string): T {
  const url = new URL(`../../tests/fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

export type RecordedCall = {
  url: string;
  method: string;
  body: unknown;
};

/**
 * A FetchLike that serves canned JSON by path and records every request, so
 * tests can assert the client sent exactly what the wire format expects.
 */
export function cannedFetch(
  routes: Record<string, unknown>,
  calls: RecordedCall[] = [],
): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : null,
    });
    const found = Object.prototype.hasOwnProperty.call(routes, url);
    const payload = found ? routes[url] : { code: "not_found", message: url };
    return new Response(JSON.stringify(payload), {
      status: found ? 200 : 404,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetchFn, calls };
}

export function errorFetch(status: number, body: unknown): FetchLike {
  return async () =>
    new Response(typeof body === "string" ? body : JSON.stringify(body), {
      status,
    });
}
