import { describe, expect, it } from "vitest";

import { PollLoop, type PollTimers, type VisibilitySource } from "../src/poll.js";

/** Deterministic timer wheel driven by test code. */
class FakeTimers implements PollTimers {
  private queue: { at: number; fn: () => void; id: number }[] = [];
  private now = 0;
  private nextId = 1;

  setTimeout(fn: () => void, ms: number): unknown {
    const id = this.nextId++;
    this.queue.push({ at: this.now + ms, fn, id });
    return id;
  }

  clearTimeout(handle: unknown): void {
    this.queue = this.queue.filter((t) => t.id !== handle);
  }

  async advance(ms: number): Promise<void> {
    const target = this.now + ms;
    for (;;) {
      this.queue.sort((a, b) => a.at - b.at);
      const next = this.queue[0];
      if (!next || next.at > target) {
        break;
      }
      this.now = next.at;
      this.queue.shift();
      next.fn();
      // Let promise chains started by the callback settle.
      for (let i = 0; i < 5; i += 1) {
        await Promise.resolve();
      }
    }
    this.now = target;
  }
}

class FakeVisibility implements VisibilitySource {
  private listeners: (() => void)[] = [];
  isHidden = false;

  hidden(): boolean {
    return this.isHidden;
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  set(hidden: boolean): void {
    this.isHidden = hidden;
    this.listeners.forEach((fn) => fn());
  }
}

function harness(fetchNewer: () => Promise<void>) {
  const timers = new FakeTimers();
  const visibility = new FakeVisibility();
  const events: string[] = [];
  const loop = new PollLoop(
    {
      fetchNewer,
      onError: (_e, delay) => events.push(`error:${delay}`),
      onRecovered: () => events.push("recovered"),
    },
    500,
    8,
    timers,
    visibility,
  );
  return { timers, visibility, events, loop };
}

describe("PollLoop", () => {
  it("polls on the configured interval", async () => {
    let calls = 0;
    const { timers, loop } = harness(async () => {
      calls += 1;
    });
    loop.start();
    await timers.advance(0);
    expect(calls).toBe(1);
    await timers.advance(1500);
    expect(calls).toBe(4);
    loop.stop();
    await timers.advance(2000);
    expect(calls).toBe(4);
  });

  it("backs off exponentially on failure and recovers", async () => {
    let failing = true;
    const { timers, events, loop } = harness(async () => {
      if (failing) {
        throw new Error("down");
      }
    });
    loop.start();
    await timers.advance(0);      // fail #1 -> delay 1000
    await timers.advance(1000);   // fail #2 -> delay 2000
    expect(events).toEqual(["error:1000", "error:2000"]);
    await timers.advance(2000);   // fail #3 -> delay 4000
    expect(loop.currentDelayMs).toBe(4000);
    failing = false;
    await timers.advance(4000);   // success -> recovered, delay resets
    expect(events[events.length - 1]).toBe("recovered");
    expect(loop.currentDelayMs).toBe(500);
  });

  it("caps the backoff multiplier", async () => {
    const { timers, loop } = harness(async () => {
      throw new Error("down");
    });
    loop.start();
    await timers.advance(60_000);
    expect(loop.currentDelayMs).toBe(500 * 8);
    loop.stop();
  });

  it("pauses while hidden and resumes on visibility", async () => {
    let calls = 0;
    const { timers, visibility, loop } = harness(async () => {
      calls += 1;
    });
    loop.start();
    await timers.advance(0);
    expect(calls).toBe(1);
    visibility.set(true);
    await timers.advance(5000);
    expect(calls).toBe(1); // hidden: timers fire but no fetches happen
    visibility.set(false);
    await timers.advance(0);
    expect(calls).toBe(2);
    loop.stop();
  });
});
