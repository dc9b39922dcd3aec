import { ApiClient, ServiceUnreachableError } from "./api.js";
import { el } from "./dom.js";
import type { AnswerDocument, SessionView } from "./types.js";
import { traceRows, type AssistantMessage, type TraceRow, ViewSession } from "./viewSession.js";

export interface ChatOptions {
  /** Policy spec forwarded to the service when a session is created. */
  policy?: string;
  /** Delay between session polls while a run is in flight. */
  pollIntervalMs?: number;
  /** Called when the user asks to explore a node from the answer chain. */
  onExplore?: (nodeId: string) => void;
}

interface RunState {
  message: AssistantMessage;
  box: HTMLElement;
  traceList: HTMLElement;
  question: string;
  sessionId: string | null;
  asked: boolean;
}

/**
 * Chat pane: sends a question, polls the session, and renders each tool call
 * as a collapsible trace row as soon as its result is in the transcript.
 *
 * The service accepts a single question per session, so every ask creates a
 * fresh session; at most one ask may be in flight at a time.
 */
export class ChatController {
  readonly messagesEl: HTMLElement;
  busy = false;

  private readonly pollIntervalMs: number;
  private readonly policy: string | undefined;
  private readonly onExplore: ((nodeId: string) => void) | undefined;

  constructor(
    private readonly api: ApiClient,
    readonly view: ViewSession,
    root: HTMLElement,
    options: ChatOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
    this.policy = options.policy;
    this.onExplore = options.onExplore;
    this.messagesEl = el("div", { class: "messages" });
    root.append(this.messagesEl);
  }

  /** Resolves once the session reaches a terminal state. */
  async ask(question: string): Promise<void> {
    const trimmed = question.trim();
    if (trimmed === "") {
      throw new Error("question must be non-empty");
    }
    if (this.busy) {
      throw new Error("a question is already in flight");
    }
    this.busy = true;
    try {
      this.view.addUser(trimmed);
      this.messagesEl.append(el("div", { class: "message user" }, [trimmed]));

      const message = this.view.addAssistant();
      const traceList = el("div", { class: "trace" });
      const box = el("div", { class: "message assistant" }, [traceList]);
      this.messagesEl.append(box);

      const state: RunState = {
        message,
        box,
        traceList,
        question: trimmed,
        sessionId: null,
        asked: false,
      };
      await this.runWithRetry(state);
    } finally {
      this.busy = false;
    }
  }

  /** Retries the run from the failed step whenever the user clicks the banner. */
  private async runWithRetry(state: RunState): Promise<void> {
    for (;;) {
      try {
        await this.run(state);
        return;
      } catch (err) {
        if (!(err instanceof ServiceUnreachableError)) {
          throw err;
        }
        await this.retryClicked(state.box);
      }
    }
  }

  private retryClicked(box: HTMLElement): Promise<void> {
    return new Promise((resolve) => {
      const button = el("button", { type: "button", class: "retry" }, ["retry"]);
      const banner = el("div", { class: "banner unreachable" }, [
        "exploration service unreachable — ",
        button,
      ]);
      button.addEventListener("click", () => {
        banner.remove();
        resolve();
      });
      box.append(banner);
    });
  }

  private async run(state: RunState): Promise<void> {
    if (state.sessionId === null) {
      const ref = await this.api.createSession(this.policy);
      state.sessionId = ref.session_id;
      this.view.sessionId = ref.session_id;
    }
    if (!state.asked) {
      await this.api.ask(state.sessionId, state.question, false);
      state.asked = true;
    }
    for (;;) {
      const view = await this.api.session(state.sessionId);
      this.applyView(state, view);
      if (view.status !== "running") {
        return;
      }
      await sleep(this.pollIntervalMs);
    }
  }

  /** Append rows for results that arrived since the previous poll; never reorder. */
  private applyView(state: RunState, view: SessionView): void {
    const rows = traceRows(view.events);
    for (const row of rows.slice(state.message.trace.length)) {
      state.traceList.append(this.renderTraceRow(state.sessionId ?? "", row));
    }
    state.message.trace = rows;
    state.message.status = view.status;

    if (view.status === "running") {
      return;
    }
    if (view.status === "failed") {
      state.message.correlationId = this.api.lastCorrelationId;
      state.box.append(this.renderErrorCard(view));
      return;
    }
    if (view.answer !== null) {
      state.message.answer = view.answer;
      state.box.append(this.renderAnswerCard(state.sessionId ?? "", view.answer));
    }
  }

  private renderTraceRow(sessionId: string, row: TraceRow): HTMLElement {
    const summary = el("summary", {}, [
      el("span", { class: "call-id" }, [row.callId]),
      el("span", { class: "tool-name" }, [row.toolName]),
      el("span", { class: `status ${row.status}` }, [
        row.status === "error" ? `error ${row.errorCode ?? ""}`.trim() : row.status,
      ]),
      el("span", { class: "elapsed" }, [`${(row.elapsed * 1000).toFixed(1)} ms`]),
    ]);
    if (row.truncated) {
      summary.append(el("span", { class: "flag truncated" }, ["truncated"]));
    }
    const body = row.payload ?? { error: row.errorCode };
    return el(
      "details",
      {
        class: "trace-row",
        id: traceRowId(sessionId, row.callId),
        "data-call-id": row.callId,
        "data-status": row.status,
        "data-elapsed": String(row.elapsed),
        "data-truncated": String(row.truncated),
      },
      [
        summary,
        el("pre", { class: "args" }, [JSON.stringify(row.args, null, 2)]),
        el("pre", { class: "payload" }, [JSON.stringify(body, null, 2)]),
      ],
    );
  }

  private renderErrorCard(view: SessionView): HTMLElement {
    return el("div", { class: "card error-card" }, [
      el("strong", {}, ["session failed"]),
      el("p", {}, [lastObservation(view) ?? "the policy could not complete this question"]),
      el("p", { class: "correlation" }, [
        `correlation id: ${this.api.lastCorrelationId ?? "unknown"}`,
      ]),
    ]);
  }

  private renderAnswerCard(sessionId: string, answer: AnswerDocument): HTMLElement {
    const card = el("div", { class: "card answer-card", "data-status": answer.status });
    if (answer.incomplete) {
      card.append(el("span", { class: "flag incomplete" }, ["incomplete"]));
    }
    if (answer.answer !== null) {
      card.append(el("p", { class: "answer-text" }, [answer.answer]));
    }
    card.append(this.renderChain(answer));
    card.append(this.renderEvidence(sessionId, answer));
    return card;
  }

  private renderChain(answer: AnswerDocument): HTMLElement {
    const { chain } = answer;
    const stages = el(
      "ol",
      { class: "stages" },
      chain.stages.map((stage) => el("li", { class: "stage" }, [stage])),
    );
    const groups = el("div", { class: "stage-groups" });
    for (const stage of chain.stages) {
      const nodes = chain.nodes.filter((node) => node.label === stage);
      groups.append(
        el("div", { class: "stage-group", "data-stage": stage }, [
          el("h4", {}, [stage]),
          el(
            "ul",
            {},
            nodes.map((node) => this.renderChainNode(node.id, node.name)),
          ),
        ]),
      );
    }
    const edges = el(
      "ul",
      { class: "chain-edges" },
      chain.edges.map((edge) =>
        el(
          "li",
          {
            class: "chain-edge",
            "data-source": edge.source,
            "data-etype": edge.etype,
            "data-target": edge.target,
          },
          [`${edge.source} —${edge.etype}→ ${edge.target}`],
        ),
      ),
    );
    return el("div", { class: "chain" }, [stages, groups, edges]);
  }

  private renderChainNode(nodeId: string, name: string | null): HTMLElement {
    const label = el("button", { type: "button", class: "node-name" }, [name ?? nodeId]);
    label.addEventListener("click", () => this.onExplore?.(nodeId));
    const pin = el("button", { type: "button", class: "pin-btn" }, [
      this.view.pins.has(nodeId) ? "★" : "☆",
    ]);
    pin.addEventListener("click", () => {
      pin.textContent = this.view.pins.toggle(nodeId) ? "★" : "☆";
    });
    return el("li", { class: "chain-node", "data-node-id": nodeId }, [label, pin]);
  }

  private renderEvidence(sessionId: string, answer: AnswerDocument): HTMLElement {
    const list = el("div", { class: "evidence" });
    for (const item of answer.evidence) {
      const chips = item.calls.map((call) => {
        const target = traceRowId(sessionId, call.call_id);
        const chip = el(
          "button",
          {
            type: "button",
            class: "evidence-chip",
            "data-target": target,
            "data-rows": String(call.rows),
          },
          [`${call.call_id} · ${call.tool_name} · ${call.rows} rows`],
        );
        chip.addEventListener("click", () => {
          const row = document.getElementById(target);
          if (row instanceof HTMLDetailsElement) {
            row.open = true;
          }
          row?.scrollIntoView({ block: "nearest" });
        });
        return chip;
      });
      list.append(
        el("div", { class: "evidence-item" }, [
          el("span", { class: "claim" }, [item.claim]),
          ...chips,
        ]),
      );
    }
    return list;
  }
}

export function traceRowId(sessionId: string, callId: string): string {
  return `trace-${sessionId}-${callId}`;
}

function lastObservation(view: SessionView): string | null {
  for (let i = view.events.length - 1; i >= 0; i -= 1) {
    const event = view.events[i];
    if (event !== undefined && event.kind === "observation") {
      return event.text;
    }
  }
  return null;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
