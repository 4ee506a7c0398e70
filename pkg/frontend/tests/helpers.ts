import { readFileSync } from "node:fs";

import type { StreamFrame } from "../src/types.js";

export function loadFixture<T>(name: string): T {
  return JSON.parse(rawFixture(name)) as T;
}

export function rawFixture(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8");
}

export function streamFrames(): StreamFrame[] {
  const frames = loadFixture<{ seq: number; record: StreamFrame["record"] }[]>("stream.json");
  return frames.map(({ seq, record }) => ({ seq, record }));
}

type FakeResponseSpec = {
  status: number;
  body: unknown;
};

/** Minimal fetch stub: answers each call from a queue of canned responses. */
export function fakeFetch(queue: FakeResponseSpec[]) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const spec = queue.shift();
    if (!spec) {
      throw new Error(`unexpected request: ${url}`);
    }
    return {
      ok: spec.status >= 200 && spec.status < 300,
      status: spec.status,
      json: async () => spec.body,
    } as Response;
  };
  return { fetchFn, calls };
}
