import type { QueryResponse } from "./types";

/** Serializes queries: at most one request in flight, and only the newest
 * submission's response reaches the display (last write wins). A submission
 * arriving mid-flight replaces any queued one and goes out when the current
 * request settles. */
export class QueryLoop {
  private seq = 0;
  private shown = 0;
  private inflight = false;
  private queued: (() => Promise<QueryResponse>) | null = null;
  private queuedSeq = 0;

  constructor(
    private onResults: (r: QueryResponse) => void,
    private onError: (err: unknown) => void = () => {},
  ) {}

  submit(send: () => Promise<QueryResponse>): number {
    const seq = ++this.seq;
    if (this.inflight) {
      this.queued = send;
      this.queuedSeq = seq;
      return seq;
    }
    void this.run(send, seq);
    return seq;
  }

  private async run(send: () => Promise<QueryResponse>, seq: number): Promise<void> {
    this.inflight = true;
    try {
      const resp = await send();
      if (seq > this.shown) {
        this.shown = seq;
        this.onResults(resp);
      }
    } catch (err) {
      if (seq > this.shown) {
        this.onError(err);
      }
    } finally {
      this.inflight = false;
      if (this.queued) {
        const next = this.queued;
        const nextSeq = this.queuedSeq;
        this.queued = null;
        void this.run(next, nextSeq);
      }
    }
  }
}
