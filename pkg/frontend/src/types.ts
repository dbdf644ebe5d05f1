// Mirrors of the steering-service response schemas.

export interface FeasibleInput {
  index: number;
  name: string;
  vector: number[] | null;
}

export interface StateView {
  id: number;
  labels: string[];
  coords: number[] | null;
}

export interface TltSnapshot {
  active: number[];
  membership: Record<string, boolean>;
}

export interface HistoryEntry {
  k: number;
  state: number;
  feasible: number[];
  chosen: number;
  next: number;
}

export interface StepView {
  session_id: string;
  k: number;
  status: string;
  formula: string;
  state: StateView;
  inputs: FeasibleInput[];
  feasible: FeasibleInput[];
  suggested: number[];
  tlt: TltSnapshot;
  history: HistoryEntry[];
}

export interface SessionCreated {
  session_id: string;
  step: StepView;
}

export interface TltNodeDump {
  id: number;
  kind: "set" | "op";
  op?: string;
  cardinality?: number;
  members?: number[];
  formula?: string;
  rule?: string;
  children: number[];
}

export interface TltDump {
  root: number;
  nodes: TltNodeDump[];
  membership?: Record<string, boolean>;
}

export interface ParseResponse {
  ok: boolean;
  formula: string | null;
  offset: number | null;
  expected: string[] | null;
}

export interface ApiError {
  code: string;
  message: string;
  field?: string | null;
}

export interface CreateSessionPayload {
  formula: string;
  system?: unknown;
  linear?: unknown;
  grid?: number[];
  input_samples?: number[];
  x0?: number | number[];
  resolver?: { kind: string; seed?: number; script?: number[] };
}
