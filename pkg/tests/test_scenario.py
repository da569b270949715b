"""Scenario DSL: parsing, reports, determinism, replay."""

import json

import pytest

from coscribe.sim.scenario import (
    ScenarioError,
    ScenarioRunner,
    parse_scenario,
    parse_time,
    replay_actions,
    run_scenario,
)
from coscribe.sim.harness import SimHarness

RULES = [
    {"template": "summary", "response": "The agent helps."},
    {"template": "task_title", "response": "Generated Title"},
    {"template": "agent_init", "response": "A suggestion."},
    {"template": "assignee_select", "response_json": {"agent_id": "a1", "confidence_rate": 0.9}},
    {"template": "segment_select", "response": "[]"},
]


def run_text(text, seed=0):
    entries = parse_scenario(text)
    harness = SimHarness(mock_rules=list(RULES), seed=seed)
    runner = ScenarioRunner(harness)
    report = runner.run_entries(entries)
    report["action_log"] = runner.action_log
    return report


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def test_parse_time_formats():
    assert parse_time("90", 1) == 90.0
    assert parse_time("5:00", 1) == 300.0
    assert parse_time("1:05:00", 1) == 3900.0
    with pytest.raises(ScenarioError):
        parse_time("nope", 3)


def test_parse_reports_line_numbers():
    with pytest.raises(ScenarioError) as err:
        parse_scenario("@0:00 alice join\nbogus line here\n")
    assert err.value.line_no == 2

    with pytest.raises(ScenarioError) as err:
        parse_scenario("@0:10 alice join\n@0:05 alice insert 0 \"x\"\n")
    assert "backwards" in str(err.value)

    with pytest.raises(ScenarioError) as err:
        parse_scenario('@0:00 alice insert 0 "unclosed\n')
    assert err.value.line_no == 1


def test_comments_and_blank_lines_ignored():
    entries = parse_scenario("# heading\n\n@0:00 alice join\n")
    assert len(entries) == 1


def test_empty_scenario_passes_with_empty_report():
    report = run_text("")
    assert report["ok"] is True
    assert report["assertions"] == []
    assert report["steps"] == 0


# ---------------------------------------------------------------------------
# Execution and assertions
# ---------------------------------------------------------------------------


def test_assertion_failures_are_entries_not_crashes():
    report = run_text(
        '@0:00 alice join\n'
        '@0:01 alice insert 0 "hello"\n'
        'assert text "goodbye"\n'
        'assert text "hello"\n'
    )
    assert report["ok"] is False
    assert [a["ok"] for a in report["assertions"]] == [False, True]


def test_unknown_action_is_schema_error():
    with pytest.raises(ScenarioError) as err:
        run_text("@0:00 alice join\n@0:01 alice teleport 3\n")
    assert err.value.line_no == 2


def test_trigger_assertions_and_virtual_time():
    report = run_text(
        "@0:00 alice join\n"
        "@12:00 advance\n"
        "assert fired short_intervals 5:00\n"
        "assert fired short_intervals 10:00\n"
        "assert fired_count short_intervals 2\n"
    )
    assert report["ok"], report["assertions"]


def test_full_flow_scenario_via_files(tmp_path):
    report = run_scenario(
        "tests/scenarios/comment_flow.scn",
        mock_script_path="tests/scenarios/comment_flow.mock.json",
    )
    assert report["ok"], [a for a in report["assertions"] if not a["ok"]]


# ---------------------------------------------------------------------------
# Determinism and replay
# ---------------------------------------------------------------------------

SCRIPT = (
    'goal "shared notes"\n'
    "@0:00 alice join\n"
    '@0:01 alice insert 0 "alpha beta gamma"\n'
    "@0:02 bob join\n"
    "@0:03 bob delete 0 6\n"
    '@0:04 alice comment 0 4 "@aiauthor tighten"\n'
    "@0:05 bob consume th1 m2 append\n"
    "@0:06 alice approve ann1\n"
    "@0:07 alice save\n"
    "@6:00 advance\n"
    "assert converged\n"
)


def test_identical_scenario_and_script_give_identical_reports():
    r1 = run_text(SCRIPT, seed=3)
    r2 = run_text(SCRIPT, seed=3)
    assert r1["final_snapshot_sha256"] == r2["final_snapshot_sha256"]
    assert r1["assertions"] == r2["assertions"]
    assert r1["events"] == r2["events"]


def test_replay_of_recorded_log_reproduces_snapshot_hash():
    report = run_text(SCRIPT, seed=3)
    replayed = replay_actions(
        report["action_log"], mock_rules=list(RULES), seed=3, goal="shared notes"
    )
    assert replayed["final_snapshot_sha256"] == report["final_snapshot_sha256"]


def test_rejoin_after_leave_resyncs_from_snapshot():
    report = run_text(
        "@0:00 alice join\n"
        '@0:01 alice insert 0 "hello"\n'
        "@0:02 alice leave\n"
        "@0:03 bob join\n"
        '@0:04 bob insert 5 " world"\n'
        "@0:05 alice join\n"
        '@0:06 alice insert 11 "!"\n'
        "assert converged\n"
        'assert text "hello world!"\n'
        'assert client_text alice "hello world!"\n'
    )
    assert report["ok"], report["assertions"]


def test_fuzz_assertions_run_through_scenarios():
    report = run_text(
        "assert convergence_fuzz replicas=3 edits=30 permutations=3 seed=5\n"
        "assert anchor_fuzz scripts=25 seed=5\n"
    )
    assert report["ok"], report["assertions"]
