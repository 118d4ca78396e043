// Payload types mirroring the redacted view served by the study host.
// The client renders only what is present here; obfuscated-gate truth is
// never part of any payload.

export type ElementKind =
  | 'battery'
  | 'switch'
  | 'and'
  | 'or'
  | 'not'
  | 'wire'
  | 'lamp'
  | 'danger'
  | 'camouflaged';

export interface ElementPayload {
  id: string;
  kind: string; // validated against ElementKind when the scene is built
  x: number;
  y: number;
}

export interface WirePayload {
  source: string;
  source_port: number;
  sink: string;
  sink_port: number;
}

export interface TaskPayload {
  elements: ElementPayload[];
  wires: WirePayload[];
  inputs: string[];
  outputs: string[];
}

export interface ZvtPayload {
  matrix_id: string | null;
  matrices_done: number;
  visible_numbers: number[];
  positions: Record<string, [number, number]>;
}

export interface TutorialPayload {
  page_index: number;
  page_count: number;
  page_id: string | null;
  title: string | null;
  body: string | null;
}

export interface ViewPayload {
  pseudonym: string;
  phase: 'psychometric_test' | 'tutorial' | 'qualification' | 'experiment' | 'ended';
  end_reason?: string | null;
  zvt?: ZvtPayload;
  tutorial?: TutorialPayload;
  task?: TaskPayload;
  task_id?: string;
  task_index?: number;
  task_count?: number;
  switches?: Record<string, number>;
  score?: number;
  switch_clicks?: number;
  confirm_clicks?: number;
  solved?: boolean;
  next_confirm_allowed?: number;
  skip_offered?: boolean;
  wire_levels?: Record<string, number>;
  output_levels?: Record<string, number>;
}

// A client event in the shape the events endpoint accepts.
export interface ClientEvent {
  op: string;
  args: Record<string, unknown>;
}

export interface ConfirmOutcome {
  kind: 'correct' | 'incorrect' | 'rejected';
  outputs?: Record<string, number>;
  retry_at?: number;
  score?: number;
}
