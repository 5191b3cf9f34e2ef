import { describe, expect, it } from "vitest";

import { downsample, FrameBuffer, FrameGapError } from "../src/buffer.js";
import { frame } from "./helpers.js";

const frames = (lo: number, hi: number) =>
  Array.from({ length: hi - lo + 1 }, (_, i) => frame(lo + i));

describe("FrameBuffer", () => {
  it("appends contiguous frames", () => {
    const buffer = new FrameBuffer();
    expect(buffer.append(frames(1, 5))).toBe(5);
    expect(buffer.lastTick).toBe(5);
    expect(buffer.nextTick).toBeDefined();
    expect(buffer.at(3)?.tick).toBe(3);
  });

  it("ignores duplicate fetches of the same range", () => {
    const buffer = new FrameBuffer();
    buffer.append(frames(1, 10));
    expect(buffer.append(frames(1, 10))).toBe(0);
    expect(buffer.length).toBe(10);
    expect(buffer.append(frames(5, 15))).toBe(5);
    expect(buffer.length).toBe(15);
  });

  it("rejects gapped appends", () => {
    const buffer = new FrameBuffer();
    buffer.append(frames(1, 4));
    expect(() => buffer.append([frame(7)])).toThrow(FrameGapError);
  });

  it("stays gap-free over many appends", () => {
    const buffer = new FrameBuffer();
    for (let chunk = 0; chunk < 50; chunk += 1) {
      buffer.append(frames(chunk * 100 + 1, (chunk + 1) * 100));
    }
    expect(buffer.length).toBe(5000);
    buffer.all().forEach((f, i) => expect(f.tick).toBe(i + 1));
  });

  it("clear resets to tick 1", () => {
    const buffer = new FrameBuffer();
    buffer.append(frames(1, 3));
    buffer.clear();
    expect(buffer.nextTick()).toBe(1);
  });
});

describe("downsample", () => {
  it("passes short series through untouched", () => {
    const input = frames(1, 100);
    expect(downsample(input, 600)).toBe(input);
  });

  it("bounds the point count and keeps endpoints", () => {
    const input = frames(1, 5000);
    const out = downsample(input, 600);
    expect(out.length).toBeLessThanOrEqual(600);
    expect(out[0].tick).toBe(1);
    expect(out[out.length - 1].tick).toBe(5000);
  });

  it("emits strictly increasing ticks (no duplicates)", () => {
    const out = downsample(frames(1, 5000), 600);
    for (let i = 1; i < out.length; i += 1) {
      expect(out[i].tick).toBeGreaterThan(out[i - 1].tick);
    }
  });
});
