// Dashboard wiring: connects the stream client to the DOM. All analytics
// come from the gateway; this file only renders them.

import { ApiClient } from "./api.js";
import { highlightTerms } from "./highlight.js";
import { submitRating } from "./ratings.js";
import { sparklinePath } from "./sparkline.js";
import { eventSourceConnector, StreamClient } from "./stream.js";
import type { SnippetDoc } from "./types.js";
import {
  createViewModel,
  searchTranscript,
  type SnippetCard,
  type ViewModel,
} from "./viewmodel.js";

const STATUS_TEXT: Record<string, string> = {
  connecting: "connecting...",
  connected: "live",
  reconnecting: "reconnecting...",
  closed: "closed",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Dashboard {
  private readonly api: ApiClient;
  private readonly vm: ViewModel;
  private readonly snippetCache = new Map<string, SnippetDoc>();
  private client: StreamClient | null = null;
  private autoScroll = true;

  constructor(baseUrl: string, sessionId: string) {
    this.api = new ApiClient(baseUrl);
    this.vm = createViewModel(sessionId);
  }

  start(): void {
    const transcript = document.getElementById("transcript")!;
    transcript.addEventListener("scroll", () => {
      const nearBottom =
        transcript.scrollTop + transcript.clientHeight >= transcript.scrollHeight - 20;
      this.autoScroll = nearBottom;
    });
    document.getElementById("search")!.addEventListener("input", (event) => {
      this.renderSearch((event.target as HTMLInputElement).value);
    });
    document.getElementById("recall-btn")!.addEventListener("click", () => {
      void this.renderRecall();
    });
    this.client = new StreamClient(
      this.vm,
      eventSourceConnector((since) => this.api.streamUrl(this.vm.sessionId, since)),
      { onStatusChange: () => this.render() },
    );
    this.client.start();
  }

  private render(): void {
    document.getElementById("status")!.textContent = STATUS_TEXT[this.vm.status] ?? this.vm.status;
    this.renderTranscript();
    this.renderBar();
    void this.renderCards();
    this.renderSparkline();
  }

  private renderTranscript(): void {
    const root = document.getElementById("transcript")!;
    root.replaceChildren();
    if (this.vm.transcript.length === 0) {
      root.appendChild(el("p", "empty", "No utterances yet - the meeting is quiet."));
      return;
    }
    for (const row of this.vm.transcript) {
      const line = el("div", "utterance");
      const speaker = el("span", "speaker", row.speaker);
      speaker.style.color = row.color;
      const time = el("span", "time", formatMs(row.tStartMs));
      line.append(speaker, time, el("span", "text", row.text));
      if (row.confidence !== undefined) {
        line.appendChild(el("span", "meta", ` ${(row.confidence * 100).toFixed(0)}%`));
      }
      // Tone and emotion are upstream pass-through; panels appear only
      // when the transcription service supplied them.
      for (const [name, value] of [["tone", row.tone], ["emotion", row.emotion]] as const) {
        if (value !== undefined && value !== null) {
          const rendered = typeof value === "string" ? value : JSON.stringify(value);
          line.appendChild(el("span", `meta ${name}`, ` ${name}: ${rendered}`));
        }
      }
      root.appendChild(line);
    }
    if (this.autoScroll) {
      root.scrollTop = root.scrollHeight;
    }
  }

  private renderBar(): void {
    const root = document.getElementById("extraction-bar")!;
    root.replaceChildren();
    for (const entry of this.vm.bar) {
      const chip = el("span", "term-chip", entry.text);
      chip.style.fontSize = `${(0.8 + 0.5 * entry.emphasis).toFixed(2)}em`;
      chip.style.opacity = `${(0.55 + 0.45 * entry.emphasis).toFixed(2)}`;
      chip.title = `score ${entry.term.score}`;
      root.appendChild(chip);
    }
  }

  private async renderCards(): Promise<void> {
    const root = document.getElementById("cards")!;
    root.replaceChildren();
    for (const card of this.vm.cards) {
      root.appendChild(await this.renderCard(card));
    }
  }

  private async renderCard(card: SnippetCard): Promise<HTMLElement> {
    const node = el("div", "card");
    const header = el("div", "card-header");
    header.append(
      el("span", `badge label-${card.result.label}`, card.result.label),
      el("span", "score", card.result.score.toFixed(3)),
      el("span", "snippet-id", card.result.snippet_id),
    );
    node.appendChild(header);

    const body = el("div", "card-body");
    const doc = await this.snippet(card.result.snippet_id);
    if (doc) {
      for (const segment of highlightTerms(doc.text, card.terms.map((t) => t.ngram))) {
        const span = el("span", segment.highlighted ? "hl" : undefined, segment.text);
        body.appendChild(span);
      }
    }
    node.appendChild(body);
    node.appendChild(this.renderStars(card));
    return node;
  }

  private renderStars(card: SnippetCard): HTMLElement {
    const row = el("div", "stars");
    for (let stars = 1; stars <= 5; stars++) {
      const button = el("button", "star", card.rating !== null && stars <= card.rating ? "★" : "☆");
      button.addEventListener("click", () => {
        void submitRating(this.api, this.vm, card.eventId, card.result.snippet_id, stars).then(
          (outcome) => {
            if (!outcome.ok) this.toast(`rating failed: ${outcome.error}`);
            this.render();
          },
        );
      });
      row.appendChild(button);
    }
    return row;
  }

  private renderSparkline(): void {
    const svg = document.getElementById("sparkline")!;
    const path = svg.querySelector("path");
    if (path) {
      path.setAttribute("d", sparklinePath(this.vm.sparkline, 280, 40));
    }
  }

  private renderSearch(query: string): void {
    const root = document.getElementById("search-results")!;
    root.replaceChildren();
    for (const row of searchTranscript(this.vm, query).slice(0, 20)) {
      root.appendChild(el("div", "search-hit", `${row.speaker}: ${row.text}`));
    }
  }

  private async renderRecall(): Promise<void> {
    const summary = await this.api.getRecall(this.vm.sessionId, 8);
    const root = document.getElementById("recall")!;
    root.replaceChildren();
    root.appendChild(el("h3", undefined, "Session recall"));
    for (const term of summary.terms) {
      root.appendChild(el("div", "recall-term", `${term.ngram.join(" ")} (${term.score.toFixed(2)})`));
    }
    for (const snippet of summary.snippets) {
      const stars = snippet.mean_stars === null ? "" : ` ★${snippet.mean_stars.toFixed(1)}`;
      root.appendChild(el("div", "recall-snippet", `${snippet.snippet_id}${stars}`));
    }
  }

  private async snippet(snippetId: string): Promise<SnippetDoc | null> {
    const cached = this.snippetCache.get(snippetId);
    if (cached) return cached;
    try {
      const doc = await this.api.getSnippet(snippetId);
      this.snippetCache.set(snippetId, doc);
      return doc;
    } catch {
      return null;
    }
  }

  private toast(message: string): void {
    const node = el("div", "toast", message);
    document.body.appendChild(node);
    setTimeout(() => node.remove(), 4000);
  }
}

function formatMs(ms: number): string {
  const seconds = Math.floor(ms / 1000);
  return `${Math.floor(seconds / 60)}:${String(seconds % 60).padStart(2, "0")}`;
}

declare global {
  interface Window {
    reqlensDashboard?: Dashboard;
  }
}

// Entry point: /ui/?session=<id> against the same origin, unless overridden.
if (typeof document !== "undefined" && document.getElementById("transcript")) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("gateway") ?? window.location.origin;
  let sessionId = params.get("session");
  const boot = async () => {
    const api = new ApiClient(base);
    if (!sessionId) {
      sessionId = (await api.createSession()).session_id;
      const url = new URL(window.location.href);
      url.searchParams.set("session", sessionId);
      window.history.replaceState(null, "", url.toString());
    }
    const dashboard = new Dashboard(base, sessionId);
    window.reqlensDashboard = dashboard;
    dashboard.start();
  };
  void boot();
}
