/** JSON payload shapes returned by the exploration service. */

export const NODE_LABELS = [
  "Author",
  "Keyword",
  "Publication",
  "Software",
  "Concept",
  "Journal",
  "Project",
  "Domain",
  "ResearchUnit",
  "Dataset",
  "Region",
] as const;

export type NodeLabel = (typeof NODE_LABELS)[number];

export type PropertyValue = string | number | boolean | string[];

export interface NodeView {
  id: string;
  label: NodeLabel;
  name: string | null;
  props?: Record<string, PropertyValue>;
}

export interface EdgeView {
  source: string;
  etype: string;
  target: string;
}

export interface Health {
  status: string;
  snapshot_format: string;
  nodes: number;
  edges: number;
  chunks: number;
}

export interface LabelCount {
  label: NodeLabel;
  count: number;
  percentage: number;
}

export interface GraphStats {
  total_nodes: number;
  total_edges: number;
  labels: LabelCount[];
  edge_types: Record<string, number>;
}

export interface Neighborhood {
  center: string;
  depth: number;
  nodes: NodeView[];
  edges: EdgeView[];
}

/** Tool invocation envelope; `payload` is present iff `status` is "ok". */
export interface ToolEnvelope {
  call_id: string;
  status: "ok" | "error";
  payload: Record<string, unknown> | null;
  error: { code: string; message: string } | null;
  elapsed: number;
  truncated: boolean;
}

export interface ExpertRow {
  author_id: string;
  name: string | null;
  composite: number;
  metrics: number[];
  normalized: number[];
  weights: number[];
}

export interface ExpertsPayload {
  experts: ExpertRow[];
  metric_names: string[];
  pool_size: number;
  reference_year: number;
  reranker_fallback: boolean;
}

export type SessionStatus = "running" | "done" | "budget_exhausted" | "failed";

export interface ThoughtEvent {
  kind: "policy_thought";
  text: string;
}

export interface ToolCallEvent {
  kind: "tool_call";
  call_id: string;
  tool_name: string;
  args: Record<string, unknown>;
}

export interface ToolResultEvent {
  kind: "tool_result";
  call_id: string;
  status: "ok" | "error";
  payload: Record<string, unknown> | null;
  error: { code: string; message: string } | null;
  elapsed: number;
  truncated: boolean;
}

export interface ObservationEvent {
  kind: "observation";
  text: string;
}

export interface FinalAnswerEvent {
  kind: "final_answer";
  text: string;
  incomplete: boolean;
  evidence: { claim: string; calls: string[] }[];
}

export type TranscriptEvent =
  | ThoughtEvent
  | ToolCallEvent
  | ToolResultEvent
  | ObservationEvent
  | FinalAnswerEvent;

export interface ChainNode {
  id: string;
  label: NodeLabel;
  name: string | null;
}

export interface Chain {
  stages: NodeLabel[];
  nodes: ChainNode[];
  edges: EdgeView[];
}

export interface EvidenceCall {
  call_id: string;
  tool_name: string;
  rows: number;
}

export interface EvidenceItem {
  claim: string;
  calls: EvidenceCall[];
}

export interface AnswerDocument {
  status: SessionStatus;
  answer: string | null;
  incomplete: boolean;
  chain: Chain;
  evidence: EvidenceItem[];
}

export interface SessionView {
  session_id: string;
  status: SessionStatus;
  step_count: number;
  max_steps: number;
  user_query: string | null;
  events: TranscriptEvent[];
  answer: AnswerDocument | null;
}

export interface SessionRef {
  session_id: string;
  status: SessionStatus;
}

/** Error body attached to non-2xx responses. */
export interface ErrorBody {
  code: string;
  message: string;
  correlation_id: string;
}
