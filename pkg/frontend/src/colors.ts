// Deterministic speaker coloring: a pure function of the speaker label, so
// the same speaker keeps the same color across frames, reloads and sessions.

export const SPEAKER_PALETTE = [
  "#4e79a7", // blue
  "#f28e2b", // orange
  "#59a14f", // green
  "#e15759", // red
  "#b07aa1", // purple
  "#76b7b2", // teal
  "#edc948", // yellow
  "#9c755f", // brown
] as const;

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

export function fnv1a32(text: string): number {
  let hash = FNV_OFFSET;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, FNV_PRIME) >>> 0;
  }
  return hash >>> 0;
}

export function speakerColor(speaker: string): string {
  return SPEAKER_PALETTE[fnv1a32(speaker) % SPEAKER_PALETTE.length];
}
