// One debounced request pipeline per control: at most one request per
// debounce window, at most one in flight, and responses carry a sequence
// number so an out-of-order arrival can never overwrite a newer frame.

export interface Clock {
  now(): number;
  setTimeout(fn: () => void, ms: number): number;
  clearTimeout(id: number): void;
}

export const realClock: Clock = {
  now: () => Date.now(),
  setTimeout: (fn, ms) => setTimeout(fn, ms) as unknown as number,
  clearTimeout: (id) => clearTimeout(id),
};

export interface AuditEntry {
  seq: number;
  issuedAt: number;
  outcome: "rendered" | "stale" | "failed";
}

export class DebouncedRequester<T> {
  private nextSeq = 0;
  private renderedSeq = -1;
  private pending: (() => Promise<T>) | null = null;
  private timer: number | null = null;
  private lastIssue = -Infinity;
  private inFlight = false;
  readonly audit: AuditEntry[] = [];

  constructor(
    private render: (value: T) => void,
    private onError: (err: unknown) => void = () => {},
    private windowMs = 100,
    private clock: Clock = realClock,
  ) {
    if (windowMs < 100) {
      throw new Error("debounce window must be at least 100 ms");
    }
  }

  /** Replace any queued request with this one and (re)arm the timer. */
  schedule(fn: () => Promise<T>): void {
    this.pending = fn;
    if (this.timer === null) {
      const wait = Math.max(0, this.lastIssue + this.windowMs - this.clock.now());
      this.timer = this.clock.setTimeout(() => {
        this.timer = null;
        this.fire();
      }, wait);
    }
  }

  private fire(): void {
    if (this.pending === null) return;
    if (this.inFlight) {
      // keep the newest request queued; it fires when the active one lands
      return;
    }
    const fn = this.pending;
    this.pending = null;
    const seq = this.nextSeq++;
    const entry: AuditEntry = { seq, issuedAt: this.clock.now(), outcome: "rendered" };
    this.audit.push(entry);
    this.lastIssue = entry.issuedAt;
    this.inFlight = true;
    fn().then(
      (value) => {
        this.inFlight = false;
        // superseded by a newer scheduled request, or older than the last
        // rendered frame: never draw it
        if (this.pending === null && seq > this.renderedSeq) {
          this.renderedSeq = seq;
          this.render(value);
        } else {
          entry.outcome = "stale";
        }
        this.drain();
      },
      (err) => {
        this.inFlight = false;
        entry.outcome = "failed";
        this.onError(err);
        this.drain();
      },
    );
  }

  private drain(): void {
    if (this.pending !== null && this.timer === null) {
      const wait = Math.max(0, this.lastIssue + this.windowMs - this.clock.now());
      this.timer = this.clock.setTimeout(() => {
        this.timer = null;
        this.fire();
      }, wait);
    }
  }

  /** True when no request windows overlap: issue times are >= windowMs apart. */
  auditWindowsOk(): boolean {
    for (let i = 1; i < this.audit.length; i++) {
      if (this.audit[i].issuedAt - this.audit[i - 1].issuedAt < this.windowMs) {
        return false;
      }
    }
    return true;
  }
}
