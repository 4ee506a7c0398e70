// Stream client: subscribes to the gateway's per-session push stream and
// folds frames into the view model. On a drop it reconnects with
// ?since=<last seq>, so missed frames are backfilled in order; the seq
// guard in applyFrame makes overlapping backfills duplicate-free.

import { applyFrame, type ViewModel } from "./viewmodel.js";
import type { LogRecord } from "./types.js";

export type FrameHandler = (seq: number, record: LogRecord) => void;

export type StreamConnection = {
  close(): void;
};

/**
 * Opens one connection; calls `onFrame` per frame and `onDrop` once when the
 * connection dies. Implemented by EventSource in the browser and by fakes
 * in tests.
 */
export type StreamConnector = (
  since: number,
  onFrame: FrameHandler,
  onDrop: () => void,
) => StreamConnection;

export type StreamClientOptions = {
  retryDelayMs?: number;
  schedule?: (fn: () => void, ms: number) => unknown;
  onStatusChange?: (vm: ViewModel) => void;
};

export class StreamClient {
  private readonly vm: ViewModel;
  private readonly connect: StreamConnector;
  private readonly retryDelayMs: number;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly onStatusChange: (vm: ViewModel) => void;
  private connection: StreamConnection | null = null;
  private stopped = false;

  constructor(vm: ViewModel, connect: StreamConnector, options: StreamClientOptions = {}) {
    this.vm = vm;
    this.connect = connect;
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.onStatusChange = options.onStatusChange ?? (() => {});
  }

  start(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    this.connection?.close();
    this.connection = null;
    this.vm.status = "closed";
    this.onStatusChange(this.vm);
  }

  private open(): void {
    if (this.stopped) {
      return;
    }
    this.connection = this.connect(
      this.vm.lastSeq,
      (seq, record) => {
        if (this.vm.status !== "connected") {
          this.vm.status = "connected";
          this.onStatusChange(this.vm);
        }
        if (applyFrame(this.vm, seq, record)) {
          this.onStatusChange(this.vm);
        }
      },
      () => this.handleDrop(),
    );
  }

  private handleDrop(): void {
    this.connection?.close();
    this.connection = null;
    if (this.stopped) {
      return;
    }
    this.vm.status = "reconnecting";
    this.onStatusChange(this.vm);
    this.schedule(() => this.open(), this.retryDelayMs);
  }
}

/** Browser connector backed by EventSource (SSE). */
export function eventSourceConnector(streamUrl: (since: number) => string): StreamConnector {
  return (since, onFrame, onDrop) => {
    const source = new EventSource(streamUrl(since));
    const handle = (event: MessageEvent) => {
      const seq = Number(event.lastEventId);
      if (!Number.isFinite(seq)) {
        return;
      }
      onFrame(seq, JSON.parse(event.data) as LogRecord);
    };
    for (const name of ["utterance", "extraction", "rating"]) {
      source.addEventListener(name, handle as EventListener);
    }
    source.onerror = () => {
      // EventSource auto-reconnects without our ?since bookkeeping; take over.
      source.close();
      onDrop();
    };
    return { close: () => source.close() };
  };
}
