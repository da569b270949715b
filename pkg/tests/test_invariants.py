"""Cross-cutting property checks: rendering goldens, audit completeness,
pipeline non-overlap."""

import json
import random
from pathlib import Path

import pytest

from coscribe.gateway import templates
from coscribe.tasks import ACCEPTED, SEGMENT_CONFIDENCE

TERMINAL_OUTCOMES = {"accepted", "filtered_overlap", "filtered_confidence", "integration_failed"}

BODY = (
    "The quick brown fox jumps over the lazy dog. "
    "Pack my box with five dozen liquor jugs. "
    "How vexingly quick daft zebras jump. "
    "Sphinx of black quartz, judge my vow. "
    "The five boxing wizards jump quickly."
)


def test_agent_init_rendering_matches_golden_bytes():
    bindings = {
        "agent_name": "Brainstormer",
        "agent_role": "Comes up with ideas",
        "sections_json": templates.sections_json(
            {"expertise": ["Creative ideas", "Concept development"], "skills": []}
        ),
        "notes": templates.notes_json(["Gives lists of 3 ideas"]),
    }
    rendered = templates.render(templates.AGENT_INIT, bindings)[0]["content"]
    golden = Path("tests/fixtures/agent_init_brainstormer.golden.txt").read_text()
    assert rendered == golden


FULL_BINDINGS = {
    "agent_name": "N", "agent_role": "R", "sections_json": "{}", "notes": "[]",
    "section_name": "expertise", "current_suggestions": "[]",
    "description": "d", "task_description": "t", "agents_info": "i",
    "task": "t", "document_text": "x",
}


@pytest.mark.parametrize("template_id", sorted(templates.TEMPLATES))
def test_no_unresolved_placeholders_in_any_template(template_id):
    import re

    for message in templates.render(template_id, FULL_BINDINGS):
        assert not re.search(r"\{[a-z_]+\}", message["content"]), message["content"]


def random_proposals(rng: random.Random, n: int) -> list[dict]:
    words = BODY.replace(".", "").replace(",", "").split()
    sentences = [s.strip() + "." for s in BODY.split(". ") if s]
    out = []
    for _ in range(n):
        kind = rng.random()
        if kind < 0.2:  # hallucinated text, never locatable
            sel = "zz" + "".join(rng.choice("qxz") for _ in range(6))
            sentence = "No such sentence anywhere."
        else:
            i = rng.randrange(len(words) - 1)
            sel = " ".join(words[i:i + rng.randint(1, 3)])
            sentence = rng.choice(sentences)
        out.append({
            "selected_text": sel,
            "selected_text_sentence": sentence,
            "reason": "r",
            "confidence_rate": round(rng.uniform(0.5, 1.0), 2),
        })
    return out


@pytest.mark.parametrize("seed", [11, 29, 47])
def test_audit_completeness_and_run_non_overlap(make_harness, seed):
    rng = random.Random(seed)
    proposals = random_proposals(rng, 8)
    h = make_harness(rules=[
        {"template": "segment_select", "response_json": proposals},
        {"template": "agent_init", "response": "suggestion"},
    ])
    svc = h.create_document()
    alice = h.client(svc, "Alice")
    alice.insert(0, BODY)
    # One pre-existing human annotation to collide with.
    alice.comment("human note", select=(4, 19))

    task = svc.create_task("alice", "polish", assignee=svc.registry.default_agent().agent_id)
    before = set(svc.doc.annotations)
    run = svc.run_task(task["task_id"])

    # Every proposal appears in exactly one segment with a terminal outcome.
    assert len(run.segments) == len(proposals)
    assert all(s.outcome in TERMINAL_OUTCOMES for s in run.segments)
    for seg, proposal in zip(run.segments, proposals):
        assert seg.selected_text == proposal["selected_text"]
        if proposal["confidence_rate"] < SEGMENT_CONFIDENCE:
            assert seg.outcome == "filtered_confidence"

    # Annotations created by the run are pairwise non-overlapping and
    # disjoint from everything that existed before.
    created = [svc.doc.annotations[a] for a in run.annotations]
    assert len(created) == sum(1 for s in run.segments if s.outcome == ACCEPTED)
    others = [svc.doc.annotations[a] for a in before]
    for i, ann in enumerate(created):
        for other in created[i + 1:]:
            assert not svc.doc.anchors_overlap(ann.anchor, other.anchor)
        for other in others:
            assert not svc.doc.anchors_overlap(ann.anchor, other.anchor)
