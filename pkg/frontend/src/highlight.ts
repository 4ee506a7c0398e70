// Content-term highlighting: exact token-sequence matches of the extracted
// n-grams inside snippet text, case-insensitive. Tokenization mirrors the
// backend (lowercase word characters, intra-word hyphens kept) so a term
// highlights precisely the tokens it was extracted from.

export type TextSegment = {
  text: string;
  highlighted: boolean;
};

type Token = {
  text: string;
  start: number;
  end: number;
};

const TOKEN_RE = /[\p{L}\p{N}]+(?:-[\p{L}\p{N}]+)*/gu;

export function tokenizeWithOffsets(text: string): Token[] {
  const tokens: Token[] = [];
  for (const match of text.matchAll(TOKEN_RE)) {
    tokens.push({
      text: match[0].toLowerCase(),
      start: match.index ?? 0,
      end: (match.index ?? 0) + match[0].length,
    });
  }
  return tokens;
}

/** Character spans covered by any of the n-grams, merged when overlapping. */
export function matchSpans(text: string, ngrams: string[][]): [number, number][] {
  const tokens = tokenizeWithOffsets(text);
  const spans: [number, number][] = [];
  for (const ngram of ngrams) {
    if (ngram.length === 0) continue;
    const lowered = ngram.map((t) => t.toLowerCase());
    for (let i = 0; i + lowered.length <= tokens.length; i++) {
      let match = true;
      for (let j = 0; j < lowered.length; j++) {
        if (tokens[i + j].text !== lowered[j]) {
          match = false;
          break;
        }
      }
      if (match) {
        spans.push([tokens[i].start, tokens[i + lowered.length - 1].end]);
      }
    }
  }
  spans.sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  const merged: [number, number][] = [];
  for (const [start, end] of spans) {
    const last = merged[merged.length - 1];
    if (last && start <= last[1]) {
      last[1] = Math.max(last[1], end);
    } else {
      merged.push([start, end]);
    }
  }
  return merged;
}

/** Split text into plain and highlighted segments; concatenation is identity. */
export function highlightTerms(text: string, ngrams: string[][]): TextSegment[] {
  const spans = matchSpans(text, ngrams);
  const segments: TextSegment[] = [];
  let cursor = 0;
  for (const [start, end] of spans) {
    if (cursor < start) {
      segments.push({ text: text.slice(cursor, start), highlighted: false });
    }
    segments.push({ text: text.slice(start, end), highlighted: true });
    cursor = end;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), highlighted: false });
  }
  return segments;
}
