"""Bounded agent loop with pluggable policies.

A policy observes (query, transcript, tool manifest) and emits one action
per step: a tool call or a final answer.  The loop dispatches calls,
appends results, and enforces the step budget.  Policy failures map to
session outcomes — timeout ⇒ failed, malformed action ⇒ an observation
that consumes a step — and can never corrupt the read-only store.

Transcripts serialize under the "TRX1" format; the canonical form omits
wall-clock timings so that identical runs are bytewise identical.
"""

from __future__ import annotations

import json
import string
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FuturesTimeout
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

import httpx

from . import gql
from .errors import MalformedActionError, PolicyTimeoutError
from .gql.ast import VarItem
from .tools import ToolCall, ToolResult, ToolRunner

TRANSCRIPT_FORMAT = "TRX1"

DEFAULT_MAX_STEPS = 8
DEFAULT_POLICY_TIMEOUT_S = 60.0
DEFAULT_RESULT_CHAR_BUDGET = 8000

BUDGET_EXHAUSTED_TEXT = (
    "I ran out of exploration steps before finishing. The partial findings "
    "gathered so far are listed in the evidence trail; treat this answer as "
    "incomplete."
)


# -- transcript events --


@dataclass
class ThoughtEvent:
    text: str

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "policy_thought", "text": self.text}


@dataclass
class CallEvent:
    call: ToolCall

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "tool_call", **self.call.to_dict()}


@dataclass
class ResultEvent:
    result: ToolResult

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "tool_result", **self.result.to_dict()}


@dataclass
class ObservationEvent:
    text: str

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "observation", "text": self.text}


@dataclass
class AnswerEvent:
    text: str
    evidence: list[dict[str, Any]]
    incomplete: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "final_answer",
            "text": self.text,
            "evidence": self.evidence,
            "incomplete": self.incomplete,
        }


Event = ThoughtEvent | CallEvent | ResultEvent | ObservationEvent | AnswerEvent


@dataclass
class Session:
    session_id: str
    user_query: str
    max_steps: int = DEFAULT_MAX_STEPS
    transcript: list[Event] = field(default_factory=list)
    step_count: int = 0
    status: str = "running"  # running | done | budget_exhausted | failed

    @property
    def call_count(self) -> int:
        return sum(1 for e in self.transcript if isinstance(e, CallEvent))

    def call_ids(self) -> set[str]:
        return {e.call.call_id for e in self.transcript if isinstance(e, CallEvent)}


# -- policies --


class Policy(Protocol):
    """Maps a request {query, transcript, manifest, ...} to one raw action.

    Raw actions are plain dicts:
      {"thought"?: str, "tool": str, "args": {...}}
      {"thought"?: str, "final_answer": {"text": str,
          "evidence": [{"claim": str, "calls": [int|str, ...]}]}}
    Evidence call references may be 1-based integers (the Nth tool call)
    or literal call ids.
    """

    def decide(self, request: dict[str, Any]) -> dict[str, Any]: ...


class ScriptedPolicy:
    """Replays a fixed action list; deterministic by construction."""

    def __init__(self, actions: list[dict[str, Any]]):
        self.actions = actions
        self._cursor = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedPolicy":
        data = json.loads(Path(path).read_text("utf-8"))
        if not isinstance(data, dict) or data.get("kind") != "scripted":
            raise ValueError(f"{path}: not a scripted policy file")
        actions = data.get("actions")
        if not isinstance(actions, list):
            raise ValueError(f"{path}: 'actions' must be a list")
        return cls(actions)

    def decide(self, request: dict[str, Any]) -> dict[str, Any]:
        if self._cursor >= len(self.actions):
            raise MalformedActionError("scripted policy has no actions left")
        action = self.actions[self._cursor]
        self._cursor += 1
        return action


class ExternalPolicy:
    """LLM policy over HTTP: POST the request, read back one action.

    The wire request carries the user query, the tool manifest, the
    transcript (tool-result payloads truncated to a character budget), and
    a prompt rendered from a versioned template file.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        template_path: str | Path | None = None,
        timeout: float = 10.0,
        result_char_budget: int = DEFAULT_RESULT_CHAR_BUDGET,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.result_char_budget = result_char_budget
        if template_path is None:
            template_path = Path(__file__).parent / "prompts" / "policy-v1.txt"
        self.template = string.Template(Path(template_path).read_text("utf-8"))

    def decide(self, request: dict[str, Any]) -> dict[str, Any]:
        prompt = self.template.substitute(
            query=request["query"],
            manifest=json.dumps(request["manifest"], ensure_ascii=False),
            transcript=json.dumps(request["transcript"], ensure_ascii=False),
        )
        body = {**request, "prompt": prompt}
        try:
            response = httpx.post(self.endpoint, json=body, timeout=self.timeout)
            response.raise_for_status()
            action = response.json()
        except httpx.TimeoutException as exc:
            raise PolicyTimeoutError(f"policy endpoint timed out: {exc}") from exc
        except httpx.HTTPError as exc:
            raise PolicyTimeoutError(f"policy endpoint unreachable: {exc}") from exc
        except ValueError as exc:
            raise MalformedActionError(f"policy returned unparseable body: {exc}") from exc
        if not isinstance(action, dict):
            raise MalformedActionError("policy response is not an action object")
        return action


# -- decision coercion --


@dataclass
class _Decision:
    thought: str | None
    tool: str | None = None
    args: dict[str, Any] | None = None
    final_text: str | None = None
    evidence: list[dict[str, Any]] | None = None

    @property
    def is_final(self) -> bool:
        return self.final_text is not None


def _coerce_action(raw: Any, existing_call_ids: set[str]) -> _Decision:
    if not isinstance(raw, dict):
        raise MalformedActionError("action is not an object")
    thought = raw.get("thought")
    if thought is not None and not isinstance(thought, str):
        raise MalformedActionError("'thought' must be a string")

    if "final_answer" in raw:
        final = raw["final_answer"]
        if not isinstance(final, dict) or not isinstance(final.get("text"), str):
            raise MalformedActionError("final_answer must carry a text string")
        evidence = []
        for entry in final.get("evidence", []):
            if not isinstance(entry, dict) or not isinstance(entry.get("claim"), str):
                raise MalformedActionError("evidence entries must carry a claim")
            calls = []
            for ref in entry.get("calls", []):
                if isinstance(ref, bool) or not isinstance(ref, (int, str)):
                    raise MalformedActionError(f"bad evidence call reference {ref!r}")
                call_id = f"call-{ref}" if isinstance(ref, int) else ref
                if call_id not in existing_call_ids:
                    raise MalformedActionError(
                        f"evidence references unknown call {call_id!r}"
                    )
                calls.append(call_id)
            evidence.append({"claim": entry["claim"], "calls": calls})
        return _Decision(thought=thought, final_text=final["text"], evidence=evidence)

    if "tool" in raw:
        tool = raw["tool"]
        args = raw.get("args", {})
        if not isinstance(tool, str):
            raise MalformedActionError("'tool' must be a string")
        if not isinstance(args, dict):
            raise MalformedActionError("'args' must be an object")
        return _Decision(thought=thought, tool=tool, args=args)

    raise MalformedActionError("action carries neither 'tool' nor 'final_answer'")


# -- the loop --


class AgentLoop:
    def __init__(
        self,
        runner: ToolRunner,
        *,
        max_steps: int = DEFAULT_MAX_STEPS,
        policy_timeout_s: float = DEFAULT_POLICY_TIMEOUT_S,
        result_char_budget: int = DEFAULT_RESULT_CHAR_BUDGET,
    ):
        if max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        self.runner = runner
        self.max_steps = max_steps
        self.policy_timeout_s = policy_timeout_s
        self.result_char_budget = result_char_budget

    def _request(self, session: Session) -> dict[str, Any]:
        events = []
        for event in session.transcript:
            data = event.to_dict()
            if isinstance(event, ResultEvent):
                rendered = json.dumps(data.get("payload"), ensure_ascii=False)
                if len(rendered) > self.result_char_budget:
                    data["payload"] = rendered[: self.result_char_budget]
                    data["payload_truncated"] = True
            events.append(data)
        return {
            "query": session.user_query,
            "step_count": session.step_count,
            "max_steps": session.max_steps,
            "manifest": self.runner.manifest(),
            "transcript": events,
        }

    def step(self, session: Session, policy: Policy) -> Session:
        if session.status != "running":
            raise ValueError(f"session is {session.status}, not running")

        if session.step_count >= session.max_steps:
            session.transcript.append(
                AnswerEvent(text=BUDGET_EXHAUSTED_TEXT, evidence=[], incomplete=True)
            )
            session.status = "budget_exhausted"
            return session

        pool = ThreadPoolExecutor(max_workers=1)
        try:
            future = pool.submit(policy.decide, self._request(session))
            raw = future.result(timeout=self.policy_timeout_s)
        except FuturesTimeout:
            session.status = "failed"
            session.transcript.append(
                ObservationEvent(
                    f"policy timed out after {self.policy_timeout_s:g}s"
                )
            )
            return session
        except PolicyTimeoutError as exc:
            session.status = "failed"
            session.transcript.append(ObservationEvent(exc.message))
            return session
        except MalformedActionError as exc:
            session.step_count += 1
            session.transcript.append(ObservationEvent(exc.message))
            return session
        except Exception as exc:  # policy bugs must not escape the loop
            session.status = "failed"
            session.transcript.append(ObservationEvent(f"policy raised: {exc}"))
            return session
        finally:
            pool.shutdown(wait=False, cancel_futures=True)

        try:
            decision = _coerce_action(raw, session.call_ids())
        except MalformedActionError as exc:
            session.step_count += 1
            session.transcript.append(ObservationEvent(exc.message))
            return session

        session.step_count += 1
        if decision.thought:
            session.transcript.append(ThoughtEvent(decision.thought))

        if decision.is_final:
            session.transcript.append(
                AnswerEvent(
                    text=decision.final_text or "",
                    evidence=decision.evidence or [],
                    incomplete=False,
                )
            )
            session.status = "done"
            return session

        call = ToolCall(
            tool_name=decision.tool or "",
            args=decision.args or {},
            call_id=f"call-{session.call_count + 1}",
        )
        session.transcript.append(CallEvent(call))
        result = self.runner.dispatch(call)
        session.transcript.append(ResultEvent(result))
        return session

    def run(
        self,
        user_query: str,
        policy: Policy,
        *,
        session_id: str | None = None,
        max_steps: int | None = None,
    ) -> Session:
        if not user_query or not user_query.strip():
            raise ValueError("user query must be non-empty")
        session = Session(
            session_id=session_id or uuid.uuid4().hex,
            user_query=user_query,
            max_steps=max_steps if max_steps is not None else self.max_steps,
        )
        while session.status == "running":
            self.step(session, policy)
        return session


# -- serialization and replay --


def serialize_session(session: Session, *, canonical: bool = False) -> dict[str, Any]:
    """TRX1 transcript; canonical form drops elapsed timings for stable bytes."""
    events = []
    for event in session.transcript:
        data = event.to_dict()
        if canonical and data.get("kind") == "tool_result":
            data.pop("elapsed", None)
        events.append(data)
    return {
        "format": TRANSCRIPT_FORMAT,
        "session_id": session.session_id,
        "user_query": session.user_query,
        "status": session.status,
        "step_count": session.step_count,
        "max_steps": session.max_steps,
        "events": events,
    }


def session_to_json(session: Session, *, canonical: bool = False) -> str:
    return json.dumps(
        serialize_session(session, canonical=canonical),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )


def replay_transcript(data: dict[str, Any], runner: ToolRunner) -> dict[str, Any]:
    """Re-dispatch every tool call of a serialized transcript.

    Returns a canonical transcript with freshly computed results; over the
    same snapshot it must equal the canonical form of the original.
    """
    if data.get("format") != TRANSCRIPT_FORMAT:
        raise ValueError(f"unsupported transcript format {data.get('format')!r}")
    events = []
    for event in data.get("events", []):
        if event.get("kind") == "tool_call":
            events.append(event)
            call = ToolCall(
                tool_name=event["tool_name"],
                args=event["args"],
                call_id=event["call_id"],
            )
            result = runner.dispatch(call).to_dict()
            result.pop("elapsed", None)
            events.append({"kind": "tool_result", **result})
        elif event.get("kind") == "tool_result":
            continue  # replaced by the freshly computed result
        else:
            events.append(event)
    return {**data, "events": events}


# -- answer documents --


def _call_results(session: Session) -> list[tuple[ToolCall, ToolResult]]:
    pairs = []
    calls: dict[str, ToolCall] = {}
    for event in session.transcript:
        if isinstance(event, CallEvent):
            calls[event.call.call_id] = event.call
        elif isinstance(event, ResultEvent):
            call = calls.get(event.result.call_id)
            if call is not None:
                pairs.append((call, event.result))
    return pairs


def _result_row_count(call: ToolCall, result: ToolResult) -> int:
    if result.status != "ok" or not isinstance(result.payload, dict):
        return 0
    payload = result.payload
    if call.tool_name == "SearchGraph":
        return int(payload.get("row_count", 0))
    for key in ("hits", "matches", "experts"):
        if key in payload:
            return len(payload[key])
    return 0


def _chain_from_transcript(session: Session) -> dict[str, Any]:
    nodes: dict[str, dict[str, Any]] = {}
    edges: dict[tuple[str, str, str], dict[str, Any]] = {}
    precedence: list[tuple[str, str]] = []
    label_first_seen: list[str] = []

    def saw_label(label: str) -> None:
        if label not in label_first_seen:
            label_first_seen.append(label)

    def add_node(cell: dict[str, Any]) -> None:
        nodes.setdefault(
            cell["id"],
            {"id": cell["id"], "label": cell["label"], "name": cell.get("name")},
        )
        saw_label(cell["label"])

    for call, result in _call_results(session):
        if result.status != "ok" or not isinstance(result.payload, dict):
            continue
        payload = result.payload

        if call.tool_name == "SearchPublications":
            if payload.get("weak_results"):
                continue
            for hit in payload.get("hits", []):
                if hit.get("score", 0.0) > 0.0:
                    add_node(
                        {
                            "id": hit["id"],
                            "label": "Publication",
                            "name": hit.get("title"),
                        }
                    )

        elif call.tool_name == "IdentifyExperts":
            for expert in payload.get("experts", []):
                add_node(
                    {
                        "id": expert["author_id"],
                        "label": "Author",
                        "name": expert.get("name"),
                    }
                )

        elif call.tool_name == "SearchGraph":
            try:
                query = gql.parse(call.args["query"])
            except Exception:
                continue  # executed results stand even if reparse fails
            columns = payload.get("columns", [])
            var_to_col = {
                item.var: idx
                for idx, item in enumerate(query.items)
                if isinstance(item, VarItem) and item.var is not None
            }
            segments = []
            for pattern in query.patterns:
                for i, edge in enumerate(pattern.edges):
                    left, right = pattern.nodes[i], pattern.nodes[i + 1]
                    if left.label and right.label:
                        precedence.append((left.label, right.label))
                        saw_label(left.label)
                        saw_label(right.label)
                    if (
                        left.var in var_to_col
                        and right.var in var_to_col
                        and not edge.variable_length
                    ):
                        segments.append((left.var, right.var, edge.etype))
            for row in payload.get("rows", []):
                for cell in row:
                    if isinstance(cell, dict) and "id" in cell and "label" in cell:
                        add_node(cell)
                for left_var, right_var, etype in segments:
                    left_cell = row[var_to_col[left_var]]
                    right_cell = row[var_to_col[right_var]]
                    if not (
                        isinstance(left_cell, dict) and isinstance(right_cell, dict)
                    ):
                        continue
                    key = (left_cell["id"], etype or "", right_cell["id"])
                    edges.setdefault(
                        key,
                        {
                            "source": left_cell["id"],
                            "target": right_cell["id"],
                            "etype": etype,
                        },
                    )

    # Stage order: topological over the label precedence seen in patterns,
    # first-seen order breaking ties (and standing in when there are cycles).
    present = {node["label"] for node in nodes.values()}
    ordered: list[str] = []
    remaining = list(label_first_seen)
    pairs = [(a, b) for a, b in precedence if a != b]
    while remaining:
        blocked = {b for a, b in pairs if a in remaining and b in remaining and a != b}
        pick = next((l for l in remaining if l not in blocked), remaining[0])
        ordered.append(pick)
        remaining.remove(pick)
    stages = [label for label in ordered if label in present]

    stage_rank = {label: i for i, label in enumerate(stages)}
    sorted_nodes = sorted(
        nodes.values(), key=lambda n: (stage_rank.get(n["label"], len(stages)), n["id"])
    )
    sorted_edges = sorted(
        edges.values(), key=lambda e: (e["source"], e["etype"] or "", e["target"])
    )
    return {"stages": stages, "nodes": sorted_nodes, "edges": sorted_edges}


def render_answer(session: Session) -> dict[str, Any]:
    """Structured answer document for a terminal session.

    Carries the answer text, an evidence table resolving each claim to its
    supporting tool calls (with result row counts), and chain data — the
    nodes and edges the investigation touched, staged for visualization.
    """
    if session.status == "running":
        raise ValueError("session is still running")

    answer_event = next(
        (e for e in session.transcript if isinstance(e, AnswerEvent)), None
    )
    by_id = {
        result.call_id: (call, result) for call, result in _call_results(session)
    }

    evidence = []
    if answer_event is not None:
        for entry in answer_event.evidence:
            calls = []
            for call_id in entry.get("calls", []):
                pair = by_id.get(call_id)
                if pair is None:
                    continue
                call, result = pair
                calls.append(
                    {
                        "call_id": call_id,
                        "tool_name": call.tool_name,
                        "rows": _result_row_count(call, result),
                    }
                )
            evidence.append({"claim": entry["claim"], "calls": calls})

    return {
        "status": session.status,
        "incomplete": session.status != "done",
        "answer": answer_event.text if answer_event is not None else None,
        "evidence": evidence,
        "chain": _chain_from_transcript(session),
    }
