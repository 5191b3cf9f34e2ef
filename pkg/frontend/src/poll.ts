/** Metrics polling: fetch from the last-known tick, append, re-render.
 * Failures back off exponentially and surface through a non-blocking
 * banner callback; polling pauses while the tab is hidden. */

export interface PollCallbacks {
  /** Fetch and apply everything newer than the last-known tick. */
  fetchNewer(): Promise<void>;
  onError?(error: unknown, nextDelayMs: number): void;
  onRecovered?(): void;
}

export interface PollTimers {
  setTimeout(fn: () => void, ms: number): unknown;
  clearTimeout(handle: unknown): void;
}

export interface VisibilitySource {
  hidden(): boolean;
  onChange(listener: () => void): void;
}

const realTimers: PollTimers = {
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
};

export const documentVisibility: VisibilitySource = {
  hidden: () => typeof document !== "undefined" && document.visibilityState === "hidden",
  onChange: (listener) => {
    if (typeof document !== "undefined") {
      document.addEventListener("visibilitychange", listener);
    }
  },
};

export class PollLoop {
  private handle: unknown = null;
  private running = false;
  private failures = 0;
  private inFlight = false;

  constructor(
    private readonly callbacks: PollCallbacks,
    readonly intervalMs = 500,
    private readonly maxBackoffMultiplier = 8,
    private readonly timers: PollTimers = realTimers,
    private readonly visibility: VisibilitySource = documentVisibility,
  ) {
    this.visibility.onChange(() => {
      if (this.running && !this.visibility.hidden()) {
        this.kick(0);
      }
    });
  }

  start(): void {
    if (!this.running) {
      this.running = true;
      this.kick(0);
    }
  }

  stop(): void {
    this.running = false;
    if (this.handle !== null) {
      this.timers.clearTimeout(this.handle);
      this.handle = null;
    }
  }

  get currentDelayMs(): number {
    return this.intervalMs * Math.min(2 ** this.failures, this.maxBackoffMultiplier);
  }

  private kick(delayMs: number): void {
    if (this.handle !== null) {
      this.timers.clearTimeout(this.handle);
    }
    this.handle = this.timers.setTimeout(() => void this.poll(), delayMs);
  }

  private async poll(): Promise<void> {
    this.handle = null;
    if (!this.running) {
      return;
    }
    if (this.visibility.hidden() || this.inFlight) {
      this.kick(this.intervalMs);
      return;
    }
    this.inFlight = true;
    try {
      await this.callbacks.fetchNewer();
      if (this.failures > 0) {
        this.failures = 0;
        this.callbacks.onRecovered?.();
      }
    } catch (error) {
      this.failures += 1;
      this.callbacks.onError?.(error, this.currentDelayMs);
    } finally {
      this.inFlight = false;
    }
    if (this.running) {
      this.kick(this.currentDelayMs);
    }
  }
}
