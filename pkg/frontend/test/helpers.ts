import type { MetricsFrame } from "../src/types.js";

export function frame(tick: number, bike = 0.02): MetricsFrame {
  return {
    tick,
    modal_share: { bike, bus: 0.16, car: 0.76 - bike, walk: 0.06 },
    satisfaction: { bike: 0.7, bus: 0.68, car: 0.87, walk: 0.74 },
    decisions: { routine: 198, biased: 0, constrained: 1, rational: 1 },
  };
}
