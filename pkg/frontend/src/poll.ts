// Fixed-interval polling with an overlap guard.
//
// A slow response must never interleave with the next tick: each feed keeps
// its cursor monotonic because at most one tick body runs at a time and the
// next one starts only from the state the previous one committed.

export const DEFAULT_POLL_MS = 2000;

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  private stopped = false;
  lastError: unknown = null;

  constructor(
    private readonly tick: () => Promise<void>,
    private readonly intervalMs: number = DEFAULT_POLL_MS,
  ) {}

  start(): void {
    this.stopped = false;
    void this.cycle();
    this.timer = setInterval(() => void this.cycle(), this.intervalMs);
  }

  private async cycle(): Promise<void> {
    if (this.inFlight || this.stopped) return;
    this.inFlight = true;
    try {
      await this.tick();
      this.lastError = null;
    } catch (err) {
      this.lastError = err; // transient by assumption; next tick retries
    } finally {
      this.inFlight = false;
    }
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }
}
