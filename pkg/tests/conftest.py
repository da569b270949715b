import pytest

from coscribe.sim.harness import SimHarness

# Every profile save regenerates its summary, so most scenarios need at
# least this rule loaded.
SUMMARY_RULE = {"template": "summary", "response": "The agent helps with writing."}
TITLE_RULE = {"template": "task_title", "response": "Generated Task Title"}


@pytest.fixture
def make_harness(tmp_path):
    def factory(rules=(), persist=False, **kwargs):
        data_dir = str(tmp_path / "data") if persist else None
        return SimHarness(
            mock_rules=[*rules, SUMMARY_RULE, TITLE_RULE],
            data_dir=data_dir,
            **kwargs,
        )

    return factory
