/** Append-only, gap-free frame buffer plus the render-time downsampler. */

import type { MetricsFrame } from "./types.js";

export class FrameGapError extends Error {
  constructor(expected: number, got: number) {
    super(`frame gap: expected tick ${expected}, got ${got}`);
  }
}

export class FrameBuffer {
  private readonly frames: MetricsFrame[] = [];

  /** Append new frames in order, silently skipping any tick already held
   * (duplicate fetches are idempotent); a skipped-ahead tick is an error. */
  append(incoming: MetricsFrame[]): number {
    let added = 0;
    for (const frame of incoming) {
      const next = this.nextTick();
      if (frame.tick < next) {
        continue;
      }
      if (frame.tick > next) {
        throw new FrameGapError(next, frame.tick);
      }
      this.frames.push(frame);
      added += 1;
    }
    return added;
  }

  nextTick(): number {
    return this.frames.length + 1;
  }

  get length(): number {
    return this.frames.length;
  }

  get lastTick(): number {
    return this.frames.length;
  }

  at(tick: number): MetricsFrame | undefined {
    return this.frames[tick - 1];
  }

  all(): readonly MetricsFrame[] {
    return this.frames;
  }

  clear(): void {
    this.frames.length = 0;
  }
}

/** Reduce to at most maxPoints frames for drawing: an even stride through
 * the buffer that always keeps the first and latest frame. Ticks stay
 * strictly increasing, so long runs stay cheap to render. */
export function downsample(
  frames: readonly MetricsFrame[],
  maxPoints: number,
): readonly MetricsFrame[] {
  if (maxPoints < 2) {
    throw new Error("maxPoints must be at least 2");
  }
  if (frames.length <= maxPoints) {
    return frames;
  }
  const picked: MetricsFrame[] = [];
  const step = (frames.length - 1) / (maxPoints - 1);
  let previousIndex = -1;
  for (let k = 0; k < maxPoints; k += 1) {
    const index = Math.min(frames.length - 1, Math.round(k * step));
    if (index !== previousIndex) {
      picked.push(frames[index]);
      previousIndex = index;
    }
  }
  return picked;
}
