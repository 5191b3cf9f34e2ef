/** Control-panel state and server-echo reconciliation.
 *
 * The pure parts (clamping, payload construction, echo application) are
 * separated from DOM wiring so they can be tested headlessly. The control
 * panel never trusts its own numbers: every slider position is corrected
 * to the value the server echoes back.
 */

import type {
  CriterionLabel,
  ModeLabel,
  MutationAck,
  MutationCommand,
} from "./types.js";

export function clampScale(value: number): number {
  if (Number.isNaN(value)) {
    return 0;
  }
  return Math.min(10, Math.max(0, value));
}

export interface EnvSliderState {
  kind: "env";
  mode: ModeLabel;
  criterion: CriterionLabel;
  value: number;
}

export interface PrioritySliderState {
  kind: "priority";
  criterion: CriterionLabel;
  value: number;
}

export type SliderState = EnvSliderState | PrioritySliderState;

export function sliderKey(slider: SliderState): string {
  return slider.kind === "env"
    ? `env:${slider.mode}:${slider.criterion}`
    : `priority:${slider.criterion}`;
}

/** Build the mutation a slider drag should send (value clamped to scale). */
export function mutationForSlider(slider: SliderState, raw: number): MutationCommand {
  const value = clampScale(raw);
  if (slider.kind === "env") {
    return { command: "set-env", mode: slider.mode, criterion: slider.criterion, value };
  }
  return { command: "set-priority", criterion: slider.criterion, target_mean: value };
}

/** The slider position after an acknowledgment is whatever the server
 * applied, not what the client asked for. */
export function valueFromAck(slider: SliderState, ack: MutationAck): number {
  const applied = ack.applied as Record<string, number>;
  return slider.kind === "env" ? applied.value : applied.target_mean;
}

export interface FlagState {
  biases: boolean;
  habits: boolean;
}

export function mutationForFlags(flags: FlagState): MutationCommand {
  return { command: "set-flags", biases: flags.biases, habits: flags.habits };
}

export function flagsFromAck(ack: MutationAck): FlagState {
  const applied = ack.applied as { biases: boolean; habits: boolean };
  return { biases: applied.biases, habits: applied.habits };
}

/** Initial env slider states straight from a snapshot's objective matrix
 * (mode-major rows in canonical order). */
export function envSlidersFromObjective(
  objective: number[][],
  modes: readonly ModeLabel[],
  criteria: readonly CriterionLabel[],
): EnvSliderState[] {
  const sliders: EnvSliderState[] = [];
  modes.forEach((mode, m) => {
    criteria.forEach((criterion, c) => {
      sliders.push({ kind: "env", mode, criterion, value: objective[m][c] });
    });
  });
  return sliders;
}
