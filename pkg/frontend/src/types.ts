// Wire types mirroring the gateway's JSON bodies. The dashboard never
// reshapes analytic values: terms, labels and scores are displayed exactly
// as received.

export type UtteranceRecord = {
  v: number;
  kind: "utterance";
  session_id: string;
  utterance_id: number;
  speaker: string;
  t_start_ms: number;
  t_end_ms: number;
  text: string;
  confidence?: number;
  tone?: unknown;
  emotion?: unknown;
};

export type RelevantTerm = {
  ngram: string[];
  order: number;
  window_count: number;
  snippet_df: number;
  score: number;
};

export type SnippetResult = {
  snippet_id: string;
  score: number;
  label: string;
  decisions: Record<string, number>;
};

export type ExtractionEventRecord = {
  v: number;
  kind: "event";
  event_id: number;
  trigger_utterance_id: number;
  window_utterance_ids: number[];
  terms: RelevantTerm[];
  results: SnippetResult[];
  created_at_ms: number;
};

export type RatingRecord = {
  v: number;
  kind: "rating";
  event_id: number;
  snippet_id: string;
  stars: number;
  rated_at_ms: number;
};

export type LogRecord = UtteranceRecord | ExtractionEventRecord | RatingRecord;

export type StreamFrame = {
  seq: number;
  record: LogRecord;
};

export type SnippetDoc = {
  snippet_id: string;
  doc_id: string;
  char_span: [number, number];
  text: string;
  length: number;
};

export type RecallSummary = {
  terms: { ngram: string[]; score: number }[];
  snippets: { snippet_id: string; score: number; mean_stars: number | null }[];
};

export type ConnectionStatus = "connecting" | "connected" | "reconnecting" | "closed";
