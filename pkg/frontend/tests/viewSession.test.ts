import { beforeEach, describe, expect, it, vi } from "vitest";

import { PinStore } from "../src/pins.js";
import type { SessionView, ToolCallEvent, TranscriptEvent } from "../src/types.js";
import { ViewSession, traceRows } from "../src/viewSession.js";
import sessionFixture from "./fixtures/session_done.json";

const session = sessionFixture as unknown as SessionView;

describe("traceRows", () => {
  it("pairs every call with its result in transcript order", () => {
    const rows = traceRows(session.events);
    const calls = session.events.filter((e): e is ToolCallEvent => e.kind === "tool_call");
    expect(rows.map((r) => r.callId)).toEqual(calls.map((c) => c.call_id));
    expect(rows.map((r) => r.toolName)).toEqual(calls.map((c) => c.tool_name));
    for (const row of rows) {
      const result = session.events.find(
        (e) => e.kind === "tool_result" && e.call_id === row.callId,
      );
      expect(result).toBeDefined();
      if (result?.kind === "tool_result") {
        expect(row.status).toBe(result.status);
        expect(row.elapsed).toBe(result.elapsed);
        expect(row.truncated).toBe(result.truncated);
        expect(row.payload).toBe(result.payload);
      }
    }
  });

  it("omits calls whose result has not arrived yet", () => {
    const pending: TranscriptEvent[] = [
      { kind: "policy_thought", text: "thinking" },
      { kind: "tool_call", call_id: "call-1", tool_name: "SearchGraph", args: {} },
    ];
    expect(traceRows(pending)).toEqual([]);
  });

  it("keeps call order even when results interleave oddly", () => {
    const events: TranscriptEvent[] = [
      { kind: "tool_call", call_id: "call-1", tool_name: "A", args: {} },
      { kind: "tool_call", call_id: "call-2", tool_name: "B", args: {} },
      {
        kind: "tool_result",
        call_id: "call-2",
        status: "ok",
        payload: {},
        error: null,
        elapsed: 0.1,
        truncated: false,
      },
      {
        kind: "tool_result",
        call_id: "call-1",
        status: "error",
        payload: null,
        error: { code: "SYNTAX", message: "bad query" },
        elapsed: 0.2,
        truncated: false,
      },
    ];
    const rows = traceRows(events);
    expect(rows.map((r) => r.callId)).toEqual(["call-1", "call-2"]);
    expect(rows[0]!.status).toBe("error");
    expect(rows[0]!.errorCode).toBe("SYNTAX");
  });
});

describe("ViewSession", () => {
  it("appends messages in conversation order", () => {
    const view = new ViewSession(new PinStore(localStorage));
    view.addUser("first question");
    const assistant = view.addAssistant();
    view.addUser("second question");
    expect(view.messages.map((m) => m.role)).toEqual(["user", "assistant", "user"]);
    expect(assistant.status).toBe("running");
    expect(assistant.trace).toEqual([]);
  });
});

describe("PinStore", () => {
  beforeEach(() => {
    localStorage.clear();
  });

  it("keeps insertion order and ignores duplicate pins", () => {
    const pins = new PinStore(localStorage);
    pins.pin("alice");
    pins.pin("p_cc1");
    pins.pin("alice");
    expect(pins.list()).toEqual(["alice", "p_cc1"]);
  });

  it("survives a reload", () => {
    const pins = new PinStore(localStorage);
    pins.pin("alice");
    pins.pin("proj_adapt");
    pins.unpin("alice");

    const reloaded = new PinStore(localStorage);
    expect(reloaded.list()).toEqual(["proj_adapt"]);
    expect(reloaded.has("alice")).toBe(false);
  });

  it("toggle reports the new state", () => {
    const pins = new PinStore(localStorage);
    expect(pins.toggle("bob")).toBe(true);
    expect(pins.toggle("bob")).toBe(false);
    expect(pins.list()).toEqual([]);
  });

  it("resets corrupted storage instead of crashing", () => {
    localStorage.setItem("kgx.pins", "{not json");
    expect(new PinStore(localStorage).list()).toEqual([]);
    localStorage.setItem("kgx.pins", JSON.stringify({ nope: 1 }));
    expect(new PinStore(localStorage).list()).toEqual([]);
  });

  it("notifies on every mutation", () => {
    const pins = new PinStore(localStorage);
    const onChange = vi.fn();
    pins.onChange = onChange;
    pins.pin("alice");
    pins.pin("alice");
    pins.unpin("alice");
    pins.unpin("alice");
    expect(onChange).toHaveBeenCalledTimes(2);
  });
});
