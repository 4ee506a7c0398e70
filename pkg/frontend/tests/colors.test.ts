import { describe, expect, it } from "vitest";

import { SPEAKER_PALETTE, speakerColor } from "../src/colors.js";
import { streamFrames } from "./helpers.js";

describe("speaker colors", () => {
  it("is a pure function of the label (stable across reloads)", () => {
    const first = speakerColor("Analyst");
    for (let i = 0; i < 100; i++) {
      expect(speakerColor("Analyst")).toBe(first);
    }
  });

  it("matches frozen values so recorded sessions re-render identically", () => {
    // Frozen expectations: a regression here would recolor every replayed
    // transcript, which the dashboard promises not to do.
    expect(speakerColor("Analyst")).toBe("#f28e2b");
    expect(speakerColor("Client")).toBe("#edc948");
    expect(speakerColor("S1")).toBe("#f28e2b");
    expect(speakerColor("S2")).toBe("#4e79a7");
  });

  it("assigns distinct colors to the fixture session speakers", () => {
    const speakers = new Set<string>();
    for (const frame of streamFrames()) {
      if (frame.record.kind === "utterance") {
        speakers.add(frame.record.speaker);
      }
    }
    expect(speakers.size).toBeGreaterThanOrEqual(2);
    const colors = new Set([...speakers].map(speakerColor));
    expect(colors.size).toBe(speakers.size);
  });

  it("only uses the fixed eight-color palette", () => {
    for (let i = 0; i < 50; i++) {
      expect(SPEAKER_PALETTE).toContain(speakerColor(`speaker-${i}`));
    }
  });
});
