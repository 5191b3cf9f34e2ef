/** Wire types for the modalsim session API. */

export const MODES = ["bike", "bus", "car", "walk"] as const;
export type ModeLabel = (typeof MODES)[number];

export const CRITERIA = [
  "ecology",
  "comfort",
  "price",
  "time",
  "practicality",
  "safety",
] as const;
export type CriterionLabel = (typeof CRITERIA)[number];

export const MODE_COLORS: Record<ModeLabel, string> = {
  bike: "#2a9d4e",
  bus: "#e0a53a",
  car: "#c44d4d",
  walk: "#4d7ac4",
};

export interface DecisionCounts {
  routine: number;
  biased: number;
  constrained: number;
  rational: number;
}

export interface MetricsFrame {
  tick: number;
  modal_share: Record<ModeLabel, number>;
  satisfaction: Record<ModeLabel, number | null>;
  decisions: DecisionCounts;
}

export interface AgentSnapshot {
  id: number;
  current_mode: ModeLabel;
  initial_usual_mode: ModeLabel;
  distance_km: number;
  has_car_access: boolean;
  has_bus_access: boolean;
  priorities: number[];
  history: ModeLabel[];
}

export interface StateSnapshot {
  schema_version: number;
  kind: string;
  tick: number;
  flags: { biases_on: boolean; habits_on: boolean };
  objective: number[][];
  agents: AgentSnapshot[];
  config: { seed: number; n_agents: number } & Record<string, unknown>;
}

export interface SessionInfo {
  session_id: string;
  tick: number;
  snapshot: StateSnapshot;
}

export type MutationCommand =
  | { command: "set-env"; mode: ModeLabel; criterion: CriterionLabel; value: number }
  | { command: "set-priority"; criterion: CriterionLabel; target_mean: number }
  | { command: "reset-habits" }
  | { command: "set-flags"; biases: boolean; habits: boolean };

export interface MutationAck {
  ok: boolean;
  tick: number;
  command: string;
  applied: Record<string, unknown>;
}

export interface ApiError {
  code: string;
  message: string;
  field?: string | null;
}
