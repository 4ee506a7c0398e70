// Stream client behaviour: live frames, drops, and reconnect backfill with
// the recorded session. Reconnects request ?since=<last seq>; overlapping
// backfills must not duplicate anything.

import { describe, expect, it } from "vitest";

import { StreamClient, type StreamConnector } from "../src/stream.js";
import type { StreamFrame } from "../src/types.js";
import { createViewModel } from "../src/viewmodel.js";
import { streamFrames } from "./helpers.js";

type Plan = {
  /** Frames to deliver on this connection attempt (before dropping). */
  deliver: (since: number) => StreamFrame[];
  dropAfter: boolean;
};

function scriptedConnector(plans: Plan[], sinceLog: number[]): StreamConnector {
  let attempt = 0;
  return (since, onFrame, onDrop) => {
    sinceLog.push(since);
    const plan = plans[Math.min(attempt, plans.length - 1)];
    attempt += 1;
    let closed = false;
    queueMicrotask(() => {
      if (closed) return;
      for (const frame of plan.deliver(since)) {
        onFrame(frame.seq, frame.record);
      }
      if (plan.dropAfter) {
        onDrop();
      }
    });
    return { close: () => void (closed = true) };
  };
}

const flush = () => new Promise((resolve) => setTimeout(resolve, 0));

describe("stream client", () => {
  it("applies live frames in order", async () => {
    const frames = streamFrames();
    const vm = createViewModel("fixture-session");
    const sinceLog: number[] = [];
    const client = new StreamClient(
      vm,
      scriptedConnector([{ deliver: () => frames, dropAfter: false }], sinceLog),
    );
    client.start();
    await flush();
    expect(vm.lastSeq).toBe(frames[frames.length - 1].seq);
    expect(sinceLog).toEqual([0]);
    expect(vm.status).toBe("connected");
    client.stop();
    expect(vm.status).toBe("closed");
  });

  it("backfills missed frames after a drop, without duplicates", async () => {
    const frames = streamFrames();
    const cut = 5;
    const vm = createViewModel("fixture-session");
    const sinceLog: number[] = [];
    const plans: Plan[] = [
      { deliver: () => frames.slice(0, cut), dropAfter: true },
      // The server replays everything after ?since on reconnect.
      { deliver: (since) => frames.filter((f) => f.seq > since), dropAfter: false },
    ];
    const statuses: string[] = [];
    const client = new StreamClient(vm, scriptedConnector(plans, sinceLog), {
      retryDelayMs: 0,
      onStatusChange: (model) => statuses.push(model.status),
    });
    client.start();
    await flush();
    await flush();

    expect(sinceLog).toEqual([0, cut]);  // resumed exactly where it stopped
    expect(vm.lastSeq).toBe(frames[frames.length - 1].seq);
    const utterances = frames.filter((f) => f.record.kind === "utterance").length;
    expect(vm.transcript).toHaveLength(utterances);  // nothing lost, nothing doubled
    const ids = vm.transcript.map((row) => row.utteranceId);
    expect(new Set(ids).size).toBe(ids.length);
    expect(statuses).toContain("reconnecting");
    expect(vm.status).toBe("connected");
    client.stop();
  });

  it("drops duplicates when a backfill overlaps what was already seen", async () => {
    const frames = streamFrames();
    const vm = createViewModel("fixture-session");
    const sinceLog: number[] = [];
    const plans: Plan[] = [
      { deliver: () => frames.slice(0, 7), dropAfter: true },
      // Misbehaving replay: resends from the beginning, ignoring ?since.
      { deliver: () => frames, dropAfter: false },
    ];
    const client = new StreamClient(vm, scriptedConnector(plans, sinceLog), {
      retryDelayMs: 0,
    });
    client.start();
    await flush();
    await flush();

    const utterances = frames.filter((f) => f.record.kind === "utterance").length;
    expect(vm.transcript).toHaveLength(utterances);
    expect(vm.events.map((e) => e.event_id)).toEqual(
      [...new Set(vm.events.map((e) => e.event_id))],
    );
    client.stop();
  });

  it("keeps reconnecting until stopped", async () => {
    const vm = createViewModel("fixture-session");
    const sinceLog: number[] = [];
    const plans: Plan[] = [{ deliver: () => [], dropAfter: true }];
    const scheduled: (() => void)[] = [];
    const client = new StreamClient(vm, scriptedConnector(plans, sinceLog), {
      retryDelayMs: 1000,
      schedule: (fn) => scheduled.push(fn),
    });
    client.start();
    await flush();
    expect(vm.status).toBe("reconnecting");
    expect(scheduled).toHaveLength(1);
    scheduled[0]();
    await flush();
    expect(sinceLog).toEqual([0, 0]);
    client.stop();
    expect(vm.status).toBe("closed");
  });
});
