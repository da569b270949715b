"""Template rendering goldens, schema validation, retries, mock determinism."""

import json

import pytest

from coscribe.errors import GatewayError, MockScriptError, RenderError, SchemaParseError
from coscribe.gateway import Gateway, MockScript
from coscribe.gateway import schemas, templates


BRAINSTORMER = {
    "agent_name": "Brainstormer",
    "agent_role": "Comes up with ideas",
    "sections_json": templates.sections_json(
        {"expertise": ["Creative ideas", "Concept development"], "skills": []}
    ),
    "notes": templates.notes_json(["Gives lists of 3 ideas"]),
}


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def test_agent_init_renders_profile_fields_verbatim():
    msgs = templates.render(templates.AGENT_INIT, BRAINSTORMER)
    assert len(msgs) == 1 and msgs[0]["role"] == "system"
    text = msgs[0]["content"]
    assert "You are an AI agent named @aiBrainstormer, specializing in the role of Comes up with ideas." in text
    assert '{"expertise": ["Creative ideas", "Concept development"], "skills": []}' in text
    assert '["Gives lists of 3 ideas"]' in text
    assert "{" not in text.replace(BRAINSTORMER["sections_json"], "").replace(BRAINSTORMER["notes"], "")


def test_rendering_is_byte_stable():
    a = templates.render(templates.AGENT_INIT, BRAINSTORMER)
    b = templates.render(templates.AGENT_INIT, dict(BRAINSTORMER))
    assert a == b


def test_empty_notes_render_as_empty_list_literal():
    bindings = dict(BRAINSTORMER, notes=templates.notes_json([]))
    text = templates.render(templates.AGENT_INIT, bindings)[0]["content"]
    assert "- notes: [] - A list of additional instructions" in text


def test_missing_placeholder_lists_names():
    with pytest.raises(RenderError) as err:
        templates.render(templates.AGENT_INIT, {"agent_name": "X"})
    assert set(err.value.missing) == {"agent_role", "sections_json", "notes"}


def test_task_title_template_messages():
    msgs = templates.render(templates.TASK_TITLE, {"description": "Fix grammar and typos across the document"})
    assert msgs[0]["role"] == "system"
    assert "not longer than 4 words" in msgs[0]["content"]
    assert msgs[1] == {
        "role": "user",
        "content": "Generate a title for this task description: Fix grammar and typos across the document",
    }


def test_segment_select_includes_document_text_message():
    msgs = templates.render(
        templates.SEGMENT_SELECT,
        {
            "agent_role": "Reviewer",
            "task": "Shorten long sentences",
            "sections_json": "{}",
            "notes": "[]",
            "document_text": "One. Two.",
        },
    )
    assert msgs[1] == {"role": "system", "content": 'document_text: "One. Two.".'}
    assert "global_task: Shorten long sentences." in msgs[0]["content"]


def test_conversation_opening_contains_history_in_order():
    opening = templates.conversation_opening(
        document_text="Hello world",
        goal_text="greeting",
        selected_text="world",
        history=[("alice", "can we do better?"), ("@aiauthor", "Sure: universe")],
        ask="@aiauthor make it shorter",
    )
    assert opening.index("[alice] can we do better?") < opening.index("[@aiauthor] Sure: universe")
    assert opening.startswith('document_text: "Hello world"')
    assert opening.endswith("User question: @aiauthor make it shorter")
    assert 'selected_text: "world"' in opening


def test_agents_info_block_format():
    class A:
        agent_id = "a1"
        role = "Review things"
        sections = {"skills": ["Proofreading"]}
        notes = []

    block = templates.agents_info_block([A()])
    assert block.startswith("Agent ID: a1, Role: Review things, \n")
    assert '"skills": ["Proofreading"]' in block


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------


def test_assignee_schema_accepts_valid_and_rejects_out_of_range():
    parsed = schemas.parse(templates.ASSIGNEE_SELECT, '{"agent_id":"a1","confidence_rate":0.9}')
    assert parsed == {"agent_id": "a1", "confidence_rate": 0.9}
    with pytest.raises(SchemaParseError):
        schemas.parse(templates.ASSIGNEE_SELECT, '{"agent_id":"a1","confidence_rate":1.7}')
    with pytest.raises(SchemaParseError):
        schemas.parse(templates.ASSIGNEE_SELECT, '{"confidence_rate":0.5}')


def test_segments_schema_empty_array_ok():
    assert schemas.parse(templates.SEGMENT_SELECT, "[]") == []


def test_segments_schema_requires_fields_and_range():
    good = json.dumps([
        {"selected_text": "cat", "selected_text_sentence": "The cat.", "reason": "r", "confidence_rate": 0.8}
    ])
    assert schemas.parse(templates.SEGMENT_SELECT, good)[0]["confidence_rate"] == 0.8
    with pytest.raises(SchemaParseError):
        schemas.parse(templates.SEGMENT_SELECT, '[{"selected_text": "x"}]')
    with pytest.raises(SchemaParseError):
        schemas.parse(
            templates.SEGMENT_SELECT,
            json.dumps([{"selected_text": "x", "selected_text_sentence": "x.", "reason": "r", "confidence_rate": -0.2}]),
        )


def test_suggestions_schema_is_list_of_strings():
    assert schemas.parse(templates.CV_SUGGESTIONS, '["a", "b", "c"]') == ["a", "b", "c"]
    assert schemas.parse(templates.CV_SUGGESTIONS, "[]") == []
    with pytest.raises(SchemaParseError):
        schemas.parse(templates.CV_SUGGESTIONS, '["a", 3]')
    with pytest.raises(SchemaParseError):
        schemas.parse(templates.CV_SUGGESTIONS, "not json")


def test_code_fences_are_tolerated():
    raw = '```json\n{"agent_id": "a2", "confidence_rate": 0.85}\n```'
    assert schemas.parse(templates.ASSIGNEE_SELECT, raw)["agent_id"] == "a2"


# ---------------------------------------------------------------------------
# Gateway behavior
# ---------------------------------------------------------------------------


def gateway_with(rules):
    return Gateway(provider=MockScript(rules), model_id="mock")


def test_mock_rule_matching_and_consumption():
    gw = gateway_with([
        {"template": "assignee_select", "contains": "grammar", "response_json": {"agent_id": "a1", "confidence_rate": 0.9}},
        {"template": "assignee_select", "response_json": {"agent_id": "a2", "confidence_rate": 0.2}},
    ])
    picked = gw.request(
        templates.ASSIGNEE_SELECT,
        {"task_description": "Fix grammar", "agents_info": "Agent ID: a1 ..."},
    )
    assert picked["agent_id"] == "a1"
    other = gw.request(
        templates.ASSIGNEE_SELECT,
        {"task_description": "Outline intro", "agents_info": "Agent ID: a2 ..."},
    )
    assert other["agent_id"] == "a2"


def test_unmatched_mock_request_raises_not_fabricates():
    gw = gateway_with([])
    with pytest.raises(MockScriptError):
        gw.request(templates.TASK_TITLE, {"description": "anything"})


def test_schema_failure_retried_once_with_reminder_then_error():
    script = MockScript([
        {"template": "assignee_select", "responses": ["garbage", '{"agent_id":"a1","confidence_rate":0.5}']},
    ])
    gw = Gateway(provider=script, model_id="mock")
    parsed = gw.request(templates.ASSIGNEE_SELECT, {"task_description": "t", "agents_info": "i"})
    assert parsed["agent_id"] == "a1"
    # The retry carried the format reminder.
    assert "Reminder" in script.requests[-1][1]

    script2 = MockScript([{"template": "assignee_select", "response": "garbage"}])
    gw2 = Gateway(provider=script2, model_id="mock")
    with pytest.raises(SchemaParseError):
        gw2.request(templates.ASSIGNEE_SELECT, {"task_description": "t", "agents_info": "i"})
    assert gw2.exchanges[-1].error is not None


def test_transport_failure_retries_then_raises():
    script = MockScript([
        {"template": "task_title", "error": "boom", "times": 2},
        {"template": "task_title", "response": "Recovered Title"},
    ])
    gw = Gateway(provider=script, model_id="mock", transport_retries=2)
    assert gw.request(templates.TASK_TITLE, {"description": "d"}) == "Recovered Title"

    gw_fail = Gateway(provider=MockScript([{"template": "task_title", "error": "down"}]), transport_retries=1)
    with pytest.raises(GatewayError):
        gw_fail.request(templates.TASK_TITLE, {"description": "d"})


def test_mock_runs_are_deterministic():
    rules = [
        {"template": "task_title", "response": "Fix Grammar Issues"},
        {"template": "summary", "response": "The agent reviews text."},
    ]

    def run():
        gw = gateway_with(rules)
        gw.request(templates.TASK_TITLE, {"description": "fix grammar"})
        gw.request(
            templates.SUMMARY,
            {"agent_role": "r", "sections_json": "{}", "notes": "[]"},
        )
        return gw.exchange_log()

    assert run() == run()
