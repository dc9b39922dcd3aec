from __future__ import annotations

import json
import time

import pytest

import kgx.agent as agent
from kgx.agent import (
    BUDGET_EXHAUSTED_TEXT,
    AgentLoop,
    AnswerEvent,
    CallEvent,
    ExternalPolicy,
    ObservationEvent,
    ResultEvent,
    ScriptedPolicy,
    Session,
    ThoughtEvent,
    render_answer,
    replay_transcript,
    serialize_session,
    session_to_json,
)
from kgx.errors import PolicyTimeoutError

from conftest import SCENARIO


def scripted(*actions) -> ScriptedPolicy:
    return ScriptedPolicy(list(actions))


FINAL = {"final_answer": {"text": "done", "evidence": []}}


@pytest.fixture()
def loop(engine) -> AgentLoop:
    return AgentLoop(engine.runner)


@pytest.fixture()
def scenario_session(loop) -> Session:
    return loop.run(
        "Who works on climate change adaptation and which funded projects "
        "cover which concepts?",
        ScriptedPolicy.from_file(SCENARIO),
        session_id="fixed-session",
    )


class TestRunLifecycle:
    def test_scenario_completes(self, scenario_session):
        session = scenario_session
        assert session.status == "done"
        assert session.step_count == 4
        assert session.call_count == 3
        kinds = [e.to_dict()["kind"] for e in session.transcript]
        assert kinds.count("tool_call") == 3
        assert kinds.count("tool_result") == 3
        assert kinds[-1] == "final_answer"

    def test_call_ids_sequential(self, scenario_session):
        ids = [
            e.call.call_id
            for e in scenario_session.transcript
            if isinstance(e, CallEvent)
        ]
        assert ids == ["call-1", "call-2", "call-3"]

    def test_empty_query_rejected(self, loop):
        with pytest.raises(ValueError):
            loop.run("", scripted(FINAL))
        with pytest.raises(ValueError):
            loop.run("   ", scripted(FINAL))

    def test_thought_recorded_before_call(self, loop):
        session = loop.run(
            "q",
            scripted(
                {"thought": "try a search",
                 "tool": "SearchPublications", "args": {"query": "climate"}},
                FINAL,
            ),
        )
        kinds = [e.to_dict()["kind"] for e in session.transcript]
        assert kinds[:3] == ["policy_thought", "tool_call", "tool_result"]

    def test_tool_error_recorded_loop_continues(self, loop):
        session = loop.run(
            "q",
            scripted({"tool": "SearchGraph", "args": {"query": "MATCH ("}}, FINAL),
        )
        assert session.status == "done"
        results = [e.result for e in session.transcript if isinstance(e, ResultEvent)]
        assert results[0].status == "error"
        assert results[0].error["code"] == "SYNTAX"

    def test_step_on_finished_session_rejected(self, loop):
        session = loop.run("q", scripted(FINAL))
        with pytest.raises(ValueError, match="done"):
            loop.step(session, scripted(FINAL))

    def test_max_steps_validation(self, engine):
        with pytest.raises(ValueError):
            AgentLoop(engine.runner, max_steps=0)


class TestBudgetExhaustion:
    def test_exhaustion_yields_incomplete_answer(self, engine):
        loop = AgentLoop(engine.runner, max_steps=2)
        only_tools = scripted(
            *[{"tool": "SearchPublications", "args": {"query": "climate"}}] * 10
        )
        session = loop.run("q", only_tools)
        assert session.status == "budget_exhausted"
        last = session.transcript[-1]
        assert isinstance(last, AnswerEvent)
        assert last.incomplete is True
        assert last.text == BUDGET_EXHAUSTED_TEXT
        assert session.call_count == 2

    def test_script_exhaustion_burns_steps_as_observations(self, engine):
        loop = AgentLoop(engine.runner, max_steps=3)
        session = loop.run(
            "q", scripted({"tool": "SearchPublications", "args": {"query": "x"}})
        )
        assert session.status == "budget_exhausted"
        observations = [
            e for e in session.transcript if isinstance(e, ObservationEvent)
        ]
        assert len(observations) == 2
        assert "no actions left" in observations[0].text


class TestMalformedActions:
    def test_malformed_consumes_step_then_continues(self, loop):
        session = loop.run("q", scripted({"bogus": 1}, FINAL))
        assert session.status == "done"
        assert session.step_count == 2
        observations = [
            e.text for e in session.transcript if isinstance(e, ObservationEvent)
        ]
        assert any("neither 'tool' nor 'final_answer'" in t for t in observations)

    def test_evidence_referencing_unknown_call(self, loop):
        bad_final = {
            "final_answer": {
                "text": "t",
                "evidence": [{"claim": "c", "calls": [7]}],
            }
        }
        session = loop.run("q", scripted(bad_final, FINAL))
        assert session.status == "done"
        observations = [
            e.text for e in session.transcript if isinstance(e, ObservationEvent)
        ]
        assert any("call-7" in t for t in observations)

    def test_integer_evidence_refs_resolve_to_call_ids(self, loop):
        session = loop.run(
            "q",
            scripted(
                {"tool": "SearchPublications", "args": {"query": "climate"}},
                {
                    "final_answer": {
                        "text": "t",
                        "evidence": [{"claim": "c", "calls": [1, "call-1"]}],
                    }
                },
            ),
        )
        answer = session.transcript[-1]
        assert isinstance(answer, AnswerEvent)
        assert answer.evidence == [{"claim": "c", "calls": ["call-1", "call-1"]}]


class TestPolicyFailure:
    def test_policy_timeout_fails_session(self, engine):
        class Sleeper:
            def decide(self, request):
                time.sleep(0.5)
                return FINAL

        loop = AgentLoop(engine.runner, policy_timeout_s=0.05)
        session = loop.run("q", Sleeper())
        assert session.status == "failed"
        last = session.transcript[-1]
        assert isinstance(last, ObservationEvent)
        assert "timed out" in last.text

    def test_policy_exception_fails_session(self, loop):
        class Broken:
            def decide(self, request):
                raise RuntimeError("kaboom")

        session = loop.run("q", Broken())
        assert session.status == "failed"
        assert "kaboom" in session.transcript[-1].text

    def test_request_shape_seen_by_policy(self, loop):
        seen = {}

        class Probe:
            def decide(self, request):
                seen.update(request)
                return FINAL

        loop.run("the question", Probe())
        assert seen["query"] == "the question"
        assert seen["step_count"] == 0
        assert seen["max_steps"] == 8
        assert [t["name"] for t in seen["manifest"]] == [
            "SearchGraph", "SearchPublications", "SearchConceptsKeywords",
            "IdentifyExperts",
        ]
        assert seen["transcript"] == []

    def test_result_payload_truncated_in_request(self, engine):
        budgets = []

        class Probe:
            def decide(self, request):
                for event in request["transcript"]:
                    if event["kind"] == "tool_result":
                        budgets.append(event)
                if any(budgets):
                    return FINAL
                return {"tool": "SearchPublications", "args": {"query": "climate"}}

        loop = AgentLoop(engine.runner, result_char_budget=50)
        loop.run("q", Probe())
        assert budgets
        assert budgets[0]["payload_truncated"] is True
        assert len(budgets[0]["payload"]) == 50


class TestScriptedPolicyFile:
    def test_from_file(self):
        policy = ScriptedPolicy.from_file(SCENARIO)
        assert len(policy.actions) == 4
        assert policy.actions[0]["tool"] == "SearchPublications"

    def test_wrong_kind_rejected(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"kind": "other", "actions": []}), "utf-8")
        with pytest.raises(ValueError, match="scripted"):
            ScriptedPolicy.from_file(path)

    def test_actions_must_be_list(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"kind": "scripted", "actions": {}}), "utf-8")
        with pytest.raises(ValueError, match="actions"):
            ScriptedPolicy.from_file(path)


class TestSerialization:
    def test_format_and_shape(self, scenario_session):
        data = serialize_session(scenario_session)
        assert data["format"] == "TRX1"
        assert data["session_id"] == "fixed-session"
        assert data["status"] == "done"
        assert len(data["events"]) == len(scenario_session.transcript)

    def test_canonical_drops_only_elapsed(self, scenario_session):
        full = serialize_session(scenario_session)
        canonical = serialize_session(scenario_session, canonical=True)
        for f_event, c_event in zip(full["events"], canonical["events"]):
            if f_event["kind"] == "tool_result":
                assert "elapsed" not in c_event
                trimmed = {k: v for k, v in f_event.items() if k != "elapsed"}
                assert c_event == trimmed
            else:
                assert c_event == f_event

    def test_canonical_json_stable_across_runs(self, loop):
        def run_once():
            return loop.run(
                "q", ScriptedPolicy.from_file(SCENARIO), session_id="s"
            )

        first = session_to_json(run_once(), canonical=True)
        second = session_to_json(run_once(), canonical=True)
        assert first == second

    def test_replay_equals_original(self, loop, scenario_session, engine):
        canonical = serialize_session(scenario_session, canonical=True)
        replayed = replay_transcript(canonical, engine.runner)
        assert replayed == canonical

    def test_replay_rejects_unknown_format(self, engine):
        with pytest.raises(ValueError, match="format"):
            replay_transcript({"format": "TRX9", "events": []}, engine.runner)


class TestRenderAnswer:
    def test_running_session_rejected(self):
        with pytest.raises(ValueError, match="running"):
            render_answer(Session(session_id="s", user_query="q"))

    def test_failed_session_renders_without_answer(self, loop):
        class Broken:
            def decide(self, request):
                raise RuntimeError("x")

        session = loop.run("q", Broken())
        doc = render_answer(session)
        assert doc["status"] == "failed"
        assert doc["incomplete"] is True
        assert doc["answer"] is None
        assert doc["evidence"] == []

    def test_scenario_answer_document(self, scenario_session):
        doc = render_answer(scenario_session)
        assert doc["status"] == "done"
        assert doc["incomplete"] is False
        for name in ("Alice Martin", "Bob Keller", "Carol Diaz"):
            assert name in doc["answer"]

        evidence = doc["evidence"]
        assert len(evidence) == 3
        assert [c["call_id"] for c in evidence[0]["calls"]] == ["call-1", "call-2"]
        rows_by_call = {
            c["call_id"]: c["rows"] for entry in evidence for c in entry["calls"]
        }
        assert rows_by_call == {"call-1": 5, "call-2": 4, "call-3": 5}

    def test_scenario_chain(self, scenario_session):
        chain = render_answer(scenario_session)["chain"]
        assert chain["stages"] == ["Author", "Publication", "Project", "Concept"]
        assert [n["id"] for n in chain["nodes"]] == [
            "alice", "bob", "carol",
            "p_cc1", "p_cc2",
            "proj_adapt", "proj_resil",
            "c_cca", "c_drought", "c_irrig", "c_soil",
        ]
        by_type: dict[str, int] = {}
        for edge in chain["edges"]:
            by_type[edge["etype"]] = by_type.get(edge["etype"], 0) + 1
        assert by_type == {"AUTHORED": 4, "FUNDED_BY": 2, "DESCRIBES": 5}
        assert {"source": "p_cc1", "target": "proj_adapt", "etype": "FUNDED_BY"} in (
            chain["edges"]
        )

    def test_chain_stable_across_runs(self, loop):
        def chain_once():
            session = loop.run("q", ScriptedPolicy.from_file(SCENARIO), session_id="s")
            return json.dumps(render_answer(session), sort_keys=True)

        assert chain_once() == chain_once()

    def test_weak_search_contributes_no_chain_nodes(self, loop):
        session = loop.run(
            "q",
            scripted(
                {"tool": "SearchPublications", "args": {"query": "quantum blockchain"}},
                FINAL,
            ),
        )
        chain = render_answer(session)["chain"]
        assert chain["nodes"] == []
        assert chain["stages"] == []


class TestExternalPolicy:
    def test_success_roundtrip(self, monkeypatch, loop):
        class FakeResponse:
            def raise_for_status(self):
                pass

            def json(self):
                return FINAL

        posted = {}

        def fake_post(url, json=None, timeout=None):
            posted["url"] = url
            posted["body"] = json
            return FakeResponse()

        monkeypatch.setattr(agent.httpx, "post", fake_post)
        policy = ExternalPolicy("http://policy.test/decide")
        session = loop.run("q", policy)
        assert session.status == "done"
        assert posted["url"] == "http://policy.test/decide"
        assert "prompt" in posted["body"]
        assert posted["body"]["query"] == "q"

    def test_transport_failure_fails_session(self, monkeypatch, loop):
        import httpx

        def boom(*a, **kw):
            raise httpx.ConnectError("no route")

        monkeypatch.setattr(agent.httpx, "post", boom)
        session = loop.run("q", ExternalPolicy("http://policy.test"))
        assert session.status == "failed"
        assert "unreachable" in session.transcript[-1].text

    def test_non_dict_action_is_malformed_not_fatal(self, monkeypatch, engine):
        class FakeResponse:
            def raise_for_status(self):
                pass

            def json(self):
                return ["not", "an", "action"]

        monkeypatch.setattr(agent.httpx, "post", lambda *a, **kw: FakeResponse())
        loop = AgentLoop(engine.runner, max_steps=1)
        session = loop.run("q", ExternalPolicy("http://policy.test"))
        assert session.status == "budget_exhausted"
        observations = [
            e.text for e in session.transcript if isinstance(e, ObservationEvent)
        ]
        assert any("not an action object" in t for t in observations)
