import type {
  AnswerDocument,
  SessionStatus,
  ToolCallEvent,
  ToolResultEvent,
  TranscriptEvent,
} from "./types.js";
import { PinStore } from "./pins.js";

/** One collapsible row of the tool trace: a call paired with its result. */
export interface TraceRow {
  callId: string;
  toolName: string;
  args: Record<string, unknown>;
  status: "ok" | "error";
  errorCode: string | null;
  elapsed: number;
  truncated: boolean;
  payload: Record<string, unknown> | null;
}

/**
 * Derive trace rows from a transcript. A call becomes a row only once its
 * result event is present, and rows keep the transcript's call order — the
 * renderer must never reorder them.
 */
export function traceRows(events: TranscriptEvent[]): TraceRow[] {
  const results = new Map<string, ToolResultEvent>();
  for (const event of events) {
    if (event.kind === "tool_result") {
      results.set(event.call_id, event);
    }
  }
  const rows: TraceRow[] = [];
  for (const event of events) {
    if (event.kind !== "tool_call") {
      continue;
    }
    const call = event as ToolCallEvent;
    const result = results.get(call.call_id);
    if (result === undefined) {
      continue;
    }
    rows.push({
      callId: call.call_id,
      toolName: call.tool_name,
      args: call.args,
      status: result.status,
      errorCode: result.error?.code ?? null,
      elapsed: result.elapsed,
      truncated: result.truncated,
      payload: result.payload,
    });
  }
  return rows;
}

export interface UserMessage {
  role: "user";
  text: string;
}

export interface AssistantMessage {
  role: "assistant";
  status: SessionStatus;
  trace: TraceRow[];
  answer: AnswerDocument | null;
  correlationId: string | null;
}

export type ChatMessage = UserMessage | AssistantMessage;

/** Client-side session state: one service session plus everything rendered for it. */
export class ViewSession {
  sessionId: string | null = null;
  readonly messages: ChatMessage[] = [];
  readonly pins: PinStore;

  constructor(pins?: PinStore) {
    this.pins = pins ?? new PinStore();
  }

  addUser(text: string): UserMessage {
    const message: UserMessage = { role: "user", text };
    this.messages.push(message);
    return message;
  }

  addAssistant(): AssistantMessage {
    const message: AssistantMessage = {
      role: "assistant",
      status: "running",
      trace: [],
      answer: null,
      correlationId: null,
    };
    this.messages.push(message);
    return message;
  }
}
