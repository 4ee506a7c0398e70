// The dashboard's state: a pure fold of stream frames. Analytic content
// (terms, labels, scores) is stored exactly as received; the view model only
// adds presentation data derived from it (colors, emphasis, ordering).

import { speakerColor } from "./colors.js";
import type {
  ConnectionStatus,
  ExtractionEventRecord,
  LogRecord,
  RatingRecord,
  RelevantTerm,
  SnippetResult,
  UtteranceRecord,
} from "./types.js";

export type TranscriptRow = {
  utteranceId: number;
  speaker: string;
  color: string;
  text: string;
  tStartMs: number;
  confidence?: number;
  tone?: unknown; // upstream pass-through; rendered only when present
  emotion?: unknown;
};

export type ExtractionBarEntry = {
  term: RelevantTerm;
  text: string;
  emphasis: number; // score relative to the strongest term in the event, (0, 1]
};

export type SnippetCard = {
  eventId: number;
  result: SnippetResult;
  terms: RelevantTerm[]; // terms of the event, for highlighting
  rating: number | null;
};

export type SparklinePoint = {
  eventId: number;
  triggerUtteranceId: number;
  topScore: number;
};

export type ViewModel = {
  sessionId: string;
  lastSeq: number;
  status: ConnectionStatus;
  transcript: TranscriptRow[];
  events: ExtractionEventRecord[];
  bar: ExtractionBarEntry[];
  cards: SnippetCard[];
  ratings: Map<string, number>; // `${event_id}:${snippet_id}` -> stars
  sparkline: SparklinePoint[];
};

export function createViewModel(sessionId: string): ViewModel {
  return {
    sessionId,
    lastSeq: 0,
    status: "connecting",
    transcript: [],
    events: [],
    bar: [],
    cards: [],
    ratings: new Map(),
    sparkline: [],
  };
}

export function ratingKey(eventId: number, snippetId: string): string {
  return `${eventId}:${snippetId}`;
}

/**
 * Fold one stream frame into the view model. Frames at or below `lastSeq`
 * are duplicates from a reconnect backfill and are dropped, so applying a
 * frame twice is harmless.
 */
export function applyFrame(vm: ViewModel, seq: number, record: LogRecord): boolean {
  if (seq <= vm.lastSeq) {
    return false;
  }
  vm.lastSeq = seq;
  switch (record.kind) {
    case "utterance":
      applyUtterance(vm, record);
      break;
    case "event":
      applyEvent(vm, record);
      break;
    case "rating":
      applyRating(vm, record);
      break;
  }
  return true;
}

function applyUtterance(vm: ViewModel, record: UtteranceRecord): void {
  vm.transcript.push({
    utteranceId: record.utterance_id,
    speaker: record.speaker,
    color: speakerColor(record.speaker),
    text: record.text,
    tStartMs: record.t_start_ms,
    confidence: record.confidence,
    tone: record.tone,
    emotion: record.emotion,
  });
}

function applyEvent(vm: ViewModel, record: ExtractionEventRecord): void {
  vm.events.push(record);
  const top = record.terms.length ? record.terms[0].score : 0;
  vm.bar = record.terms.map((term) => ({
    term,
    text: term.ngram.join(" "),
    emphasis: top > 0 ? term.score / top : 0,
  }));
  vm.cards = record.results.map((result) => ({
    eventId: record.event_id,
    result,
    terms: record.terms,
    rating: vm.ratings.get(ratingKey(record.event_id, result.snippet_id)) ?? null,
  }));
  vm.sparkline.push({
    eventId: record.event_id,
    triggerUtteranceId: record.trigger_utterance_id,
    topScore: record.results.length ? record.results[0].score : 0,
  });
}

function applyRating(vm: ViewModel, record: RatingRecord): void {
  setRating(vm, record.event_id, record.snippet_id, record.stars);
}

/** Update the rating map and any card currently showing the snippet. */
export function setRating(
  vm: ViewModel,
  eventId: number,
  snippetId: string,
  stars: number | null,
): void {
  const key = ratingKey(eventId, snippetId);
  if (stars === null) {
    vm.ratings.delete(key);
  } else {
    vm.ratings.set(key, stars);
  }
  for (const card of vm.cards) {
    if (card.eventId === eventId && card.result.snippet_id === snippetId) {
      card.rating = stars;
    }
  }
}

/** Case-insensitive client-side transcript search; pure and order-stable. */
export function searchTranscript(vm: ViewModel, query: string): TranscriptRow[] {
  const needle = query.trim().toLowerCase();
  if (!needle) {
    return [];
  }
  return vm.transcript.filter((row) => row.text.toLowerCase().includes(needle));
}
