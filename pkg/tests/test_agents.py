"""Agent registry: handles, presets, suggestion contract, summaries, history."""

import pytest

from coscribe.agents import (
    DEFAULT_HANDLE,
    AgentRegistry,
    handle_for,
    sentence_count,
    truncate_sentences,
)
from coscribe.errors import (
    HandleTakenError,
    SuggestionUnavailableError,
    ValidationError,
)
from coscribe.gateway import Gateway, MockScript
from coscribe.ids import IdFactory

SUMMARY_RULE = {"template": "summary", "response": "The agent helps with writing. It keeps answers short."}


def registry(extra_rules=()):
    gw = Gateway(provider=MockScript([*extra_rules, SUMMARY_RULE]), model_id="mock")
    return AgentRegistry(gateway=gw, ids=IdFactory())


# ---------------------------------------------------------------------------
# Creation and handles
# ---------------------------------------------------------------------------


def test_create_derives_lowercase_handle():
    reg = registry()
    agent = reg.create(
        "alice",
        name="Brainstormer",
        role="Comes up with ideas",
        sections={"expertise": ["Creative ideas", "Concept development"]},
    )
    assert agent.handle == "brainstormer"
    assert agent.mention == "@brainstormer"
    assert agent.sections["expertise"] == ["Creative ideas", "Concept development"]
    assert agent.sections["skills"] == []  # seeded by default
    assert agent.summary != "" and not agent.summary_stale


def test_all_empty_profile_is_valid():
    reg = registry()
    agent = reg.create("alice", name="Muse")
    assert agent.role == ""
    assert agent.notes == []
    assert agent.summary != ""


def test_duplicate_handle_rejected_case_insensitively():
    reg = registry()
    reg.create("alice", name="Brainstormer")
    with pytest.raises(HandleTakenError):
        reg.create("bob", name="BRAIN stormer")
    with pytest.raises(HandleTakenError):
        reg.create("bob", name="Ai Author")  # clashes with the default agent
    with pytest.raises(ValidationError):
        reg.create("bob", name="   ")


def test_default_agent_exists_and_cannot_be_deleted():
    reg = registry()
    default = reg.default_agent()
    assert default.handle == DEFAULT_HANDLE
    assert default.name == "AI Author"
    with pytest.raises(ValidationError):
        reg.delete(default.agent_id)
    # Unique after arbitrary create/delete churn.
    a = reg.create("alice", name="Helper")
    reg.delete(a.agent_id)
    assert sum(1 for x in reg.all() if x.is_default) == 1


def test_custom_sections_allowed():
    reg = registry()
    agent = reg.create("alice", name="Historian", sections={"sources": ["Archives"]})
    assert agent.sections["sources"] == ["Archives"]
    assert set(agent.sections) == {"expertise", "skills", "sources"}


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def test_instantiate_preset_copies_role():
    reg = registry()
    agent = reg.instantiate_preset("alice", "reviewer")
    assert agent.handle == "reviewer"
    assert "feedback" in agent.role.lower() or "review" in agent.role.lower()
    assert agent.creator == "alice"


def test_preset_twice_gets_disambiguated_handle():
    reg = registry()
    first = reg.instantiate_preset("alice", "reviewer")
    second = reg.instantiate_preset("bob", "reviewer")
    assert first.handle == "reviewer"
    assert second.handle == "reviewer2"
    assert second.role == first.role


def test_unknown_preset_errors():
    reg = registry()
    with pytest.raises(ValidationError):
        reg.instantiate_preset("alice", "nonexistent")


def test_all_four_presets_ship():
    reg = registry()
    from coscribe.agents import load_presets

    ids = {p["preset_id"] for p in load_presets()}
    assert ids == {"reviewer", "idea_generator", "structure_formatting", "english_teacher"}
    for pid in ids:
        reg.instantiate_preset("alice", pid)


# ---------------------------------------------------------------------------
# CV suggestions contract
# ---------------------------------------------------------------------------


def suggestion_registry(response):
    rule = {"template": "cv_suggestions", "response_json": response}
    return registry(extra_rules=[rule])


def test_suggestions_happy_path_returns_three_novel_values():
    reg = suggestion_registry(["Idea mapping", "Metaphors", "Analogies"])
    agent = reg.create("alice", "Brainstormer", sections={"expertise": ["Creative ideas"]})
    out = reg.suggest_section_values(agent.agent_id, "expertise", current_suggestions=[])
    assert out == ["Idea mapping", "Metaphors", "Analogies"]
    assert "Creative ideas" not in out


def test_two_items_is_noncompliant_empty():
    reg = suggestion_registry(["One", "Two"])
    agent = reg.create("alice", "Brainstormer")
    assert reg.suggest_section_values(agent.agent_id, "expertise", []) == []


def test_duplicate_of_current_suggestions_filtered_to_empty():
    reg = suggestion_registry(["Metaphors", "Analogies", "Metaphors"])
    agent = reg.create("alice", "Brainstormer")
    assert reg.suggest_section_values(agent.agent_id, "expertise", ["analogies"]) == []


def test_overlong_value_makes_batch_noncompliant():
    reg = suggestion_registry(["Good", "Also good", "three whole words here"])
    agent = reg.create("alice", "Brainstormer")
    assert reg.suggest_section_values(agent.agent_id, "expertise", []) == []


def test_hyphenated_counts_as_one_word():
    reg = suggestion_registry(["Well-formed prose", "Style", "Tone"])
    agent = reg.create("alice", "Brainstormer")
    out = reg.suggest_section_values(agent.agent_id, "expertise", [])
    assert out == ["Well-formed prose", "Style", "Tone"]


def test_unknown_section_and_gateway_failure():
    reg = registry(extra_rules=[{"template": "cv_suggestions", "error": "down"}])
    agent = reg.create("alice", "Brainstormer")
    with pytest.raises(ValidationError):
        reg.suggest_section_values(agent.agent_id, "nope", [])
    with pytest.raises(SuggestionUnavailableError):
        reg.suggest_section_values(agent.agent_id, "expertise", [])


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


def test_summary_regenerated_on_every_save():
    reg = registry(extra_rules=[{
        "template": "summary",
        "responses": ["First summary.", "Second summary."],
    }])
    agent = reg.create("alice", "Writer")
    assert agent.summary == "First summary."
    reg.update(agent.agent_id, "bob", role="Writes better")
    assert agent.summary == "Second summary."
    assert agent.last_editor == "bob"
    assert agent.summary_version == agent.version


def test_overlong_summary_truncated_at_fifth_sentence():
    seven = "One. Two. Three. Four. Five. Six. Seven."
    reg = registry(extra_rules=[{"template": "summary", "response": seven, "times": 1}])
    agent = reg.create("alice", "Writer")
    assert agent.summary == "One. Two. Three. Four. Five."
    assert sentence_count(agent.summary) == 5


def test_empty_summary_stored():
    reg = registry(extra_rules=[{"template": "summary", "response": "", "times": 1}])
    agent = reg.create("alice", "Writer")
    assert agent.summary == ""
    assert not agent.summary_stale


def test_summary_gateway_failure_keeps_previous_and_flags_stale():
    reg = registry(extra_rules=[
        {"template": "summary", "response": "Original summary.", "times": 1},
        # Survives the transport retries so the failure actually sticks.
        {"template": "summary", "error": "down", "times": 3},
    ])
    agent = reg.create("alice", "Writer")
    reg.update(agent.agent_id, "alice", role="Changed")
    assert agent.summary == "Original summary."
    assert agent.summary_stale


def test_truncate_sentences_edge_cases():
    assert truncate_sentences("No terminator at all") == "No terminator at all"
    assert truncate_sentences("A. B. C. D. E.") == "A. B. C. D. E."
    assert truncate_sentences("A. B. C. D. E. trailing fragment") == "A. B. C. D. E."
    assert truncate_sentences("Dr. Who? Yes! Really? Hmm. Extra. More.") == "Dr. Who? Yes! Really? Hmm."
    assert sentence_count("") == 0
    assert sentence_count("One") == 1
    assert sentence_count("One. Two") == 2


# ---------------------------------------------------------------------------
# Run history
# ---------------------------------------------------------------------------


def test_record_run_orders_by_timestamp_and_never_shrinks():
    reg = registry()
    agent = reg.create("alice", "Writer")
    reg.record_run(agent.agent_id, "run2", started_at=20.0)
    reg.record_run(agent.agent_id, "run1", started_at=10.0)
    reg.record_run(agent.agent_id, "run3", started_at=30.0)
    assert agent.run_ids() == ["run1", "run2", "run3"]


def test_registry_roundtrip():
    reg = registry()
    agent = reg.create("alice", "Writer", role="Writes")
    reg.record_run(agent.agent_id, "run1", started_at=5.0)
    data = reg.to_dict()

    reg2 = registry()
    reg2.restore(data)
    assert {a.agent_id for a in reg2.all()} == {a.agent_id for a in reg.all()}
    assert reg2.get(agent.agent_id).run_ids() == ["run1"]
    assert reg2.default_agent().handle == DEFAULT_HANDLE


def test_handle_for_strips_non_alphanumerics():
    assert handle_for("Structure & Formatting") == "structureformatting"
    assert handle_for("AI Author") == "aiauthor"
    with pytest.raises(ValidationError):
        handle_for("!!!")
