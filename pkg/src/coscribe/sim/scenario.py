"""Line-oriented scenario scripts with virtual timestamps.

A scenario drives one document on a fresh in-process server: steps are
`@TIME client action args...` lines executed in order (the clock advances
through any trigger deadlines on the way), and `assert kind args...` lines
become report entries. Parse problems fail fast with line numbers;
assertion failures never crash the run.

    goal "essay on AI in daily life"
    @0:00 alice join
    @0:05 alice insert 0 "Hello world"
    @0:10 alice comment 0 5 "@aiauthor improve this"
    @0:11 alice consume th1 m2 append
    assert converged
    assert fired short_intervals 5:00
"""

from __future__ import annotations

import json
import shlex
from pathlib import Path

from ..errors import CoscribeError
from . import properties
from .harness import SimHarness


class ScenarioError(CoscribeError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_time(token: str, line_no: int) -> float:
    try:
        parts = token.split(":")
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 2:
            return int(parts[0]) * 60 + float(parts[1])
        if len(parts) == 3:
            return int(parts[0]) * 3600 + int(parts[1]) * 60 + float(parts[2])
    except ValueError:
        pass
    raise ScenarioError(line_no, f"bad timestamp {token!r}")


def _kwargs(tokens: list[str], line_no: int) -> dict:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ScenarioError(line_no, f"expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        try:
            out[key] = int(value)
        except ValueError:
            out[key] = value
    return out


def parse_scenario(text: str) -> list[dict]:
    """Returns ordered entries: {"line", "kind": step|assert|goal, ...}."""
    entries = []
    last_time = 0.0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = shlex.split(line)
        except ValueError as e:
            raise ScenarioError(line_no, f"unbalanced quotes: {e}") from None
        if tokens[0] == "goal":
            if len(tokens) != 2:
                raise ScenarioError(line_no, 'goal takes one quoted argument')
            entries.append({"line": line_no, "kind": "goal", "text": tokens[1]})
        elif tokens[0] == "assert":
            if len(tokens) < 2:
                raise ScenarioError(line_no, "assert needs a kind")
            entries.append({
                "line": line_no, "kind": "assert", "raw": line,
                "check": tokens[1], "args": tokens[2:],
            })
        elif tokens[0].startswith("@"):
            at = parse_time(tokens[0][1:], line_no)
            if at < last_time:
                raise ScenarioError(line_no, f"time {tokens[0]} goes backwards")
            last_time = at
            if len(tokens) < 2:
                raise ScenarioError(line_no, "step needs a client and action")
            if tokens[1] == "advance":
                entries.append({"line": line_no, "kind": "step", "at": at,
                                "client": None, "action": "advance", "args": []})
            else:
                if len(tokens) < 3:
                    raise ScenarioError(line_no, "step needs a client and action")
                entries.append({"line": line_no, "kind": "step", "at": at,
                                "client": tokens[1], "action": tokens[2], "args": tokens[3:]})
        else:
            raise ScenarioError(line_no, f"unrecognized line: {line!r}")
    return entries


class ScenarioRunner:
    def __init__(self, harness: SimHarness):
        self.h = harness
        self.service = None
        self.action_log: list[dict] = []

    # ------------------------------------------------------------------

    def _doc(self, goal: str = ""):
        if self.service is None:
            self.service = self.h.create_document(goal_text=goal)
        return self.service

    def run_entries(self, entries: list[dict]) -> dict:
        assertions = []
        steps = 0
        for entry in entries:
            if entry["kind"] == "goal":
                self._doc(goal=entry["text"])
            elif entry["kind"] == "step":
                self.execute_step(entry)
                steps += 1
            else:
                result = self.evaluate_assert(entry)
                assertions.append(result)
        service = self._doc()
        report = {
            "ok": all(a["ok"] for a in assertions),
            "steps": steps,
            "assertions": assertions,
            "events": len(self.h.events),
            "final_snapshot_sha256": self.h.snapshot_hash(service),
        }
        return report

    # ------------------------------------------------------------------
    # Steps
    # ------------------------------------------------------------------

    def execute_step(self, entry: dict) -> None:
        service = self._doc()
        self.h.advance_to(entry["at"])
        self.action_log.append({
            "at": entry["at"], "client": entry["client"],
            "action": entry["action"], "args": entry["args"],
        })
        action = entry["action"]
        args = entry["args"]
        line = entry["line"]
        if action == "advance":
            return
        name = entry["client"]
        try:
            if action == "join":
                self.h.client(service, name)
                return
            client = self.h.clients.get(name.lower())
            if client is None:
                raise ScenarioError(line, f"client {name!r} has not joined")
            if action == "leave":
                client.leave()
            elif action == "insert":
                client.insert(int(args[0]), args[1])
            elif action == "delete":
                client.delete(int(args[0]), int(args[1]))
            elif action == "comment":
                client.comment(args[2], select=(int(args[0]), int(args[1])))
            elif action == "reply":
                client.comment(args[1], thread=args[0])
            elif action == "consume":
                client.consume(args[0], args[1], args[2])
            elif action == "approve":
                client.approve(args[0])
            elif action == "close":
                service.close_annotation(client.user, args[0])
            elif action == "save":
                client.save()
            elif action == "create_agent":
                service.create_agent(client.user, args[0], args[1] if len(args) > 1 else "")
            elif action == "preset":
                service.instantiate_preset(client.user, args[0])
            elif action == "create_task":
                self._create_task(service, client, args, line)
            elif action == "run_task":
                service.run_task(args[0])
            elif action == "run_shortcut":
                service.run_task(args[0], selection=(int(args[1]), int(args[2])))
            else:
                raise ScenarioError(line, f"unknown action {action!r}")
        except ScenarioError:
            raise
        except (IndexError, ValueError) as e:
            raise ScenarioError(line, f"bad arguments for {action}: {e}") from None

    def _create_task(self, service, client, args: list[str], line: int) -> None:
        if not args:
            raise ScenarioError(line, "create_task needs a description")
        description = args[0]
        assignee = None
        interaction = "manual"
        trigger = None
        shortcut = False
        for tok in args[1:]:
            if tok == "shortcut":
                shortcut = True
            elif tok == "manual":
                interaction = "manual"
            elif tok.startswith("autonomous:"):
                interaction = "autonomous"
                trigger = tok.split(":", 1)[1]
            elif tok.startswith("@"):
                agent = service.registry.by_handle(tok[1:])
                if agent is None:
                    raise ScenarioError(line, f"unknown agent {tok}")
                assignee = agent.agent_id
            elif tok == "auto":
                assignee = None
            else:
                raise ScenarioError(line, f"unknown create_task option {tok!r}")
        service.create_task(client.user, description, assignee, interaction, trigger, shortcut)

    # ------------------------------------------------------------------
    # Assertions
    # ------------------------------------------------------------------

    def evaluate_assert(self, entry: dict) -> dict:
        check, args, line = entry["check"], entry["args"], entry["line"]
        try:
            ok, detail = self._check(check, args, line)
        except ScenarioError:
            raise
        except Exception as e:  # assertion failures are report entries
            ok, detail = False, f"{type(e).__name__}: {e}"
        return {"line": line, "text": entry["raw"], "ok": ok, "detail": detail}

    def _check(self, check: str, args: list[str], line: int) -> tuple[bool, str]:
        service = self._doc()
        if check == "converged":
            texts = {c.replica.text for c in self.h.clients.values() if c.online}
            texts.add(service.doc.text)
            return len(texts) == 1, f"{len(texts)} distinct bodies among server+online clients"
        if check == "text":
            return service.doc.text == args[0], f"server text {service.doc.text!r}"
        if check == "text_contains":
            return args[0] in service.doc.text, f"server text {service.doc.text!r}"
        if check == "client_text":
            client = self.h.clients[args[0].lower()]
            return client.text == args[1], f"client text {client.text!r}"
        if check == "annotations":
            want = int(args[0])
            state = args[1] if len(args) > 1 else None
            anns = [a for a in service.doc.annotations.values() if state is None or a.state == state]
            return len(anns) == want, f"{len(anns)} annotations ({state or 'any state'})"
        if check == "pending":
            regions = service.doc.pending_regions()
            text = "".join(service.doc.text[lo:hi] for lo, hi in sorted(regions.values()))
            return text == args[0], f"pending text {text!r}"
        if check == "pending_empty":
            regions = service.doc.pending_regions()
            return regions == {}, f"pending regions {regions}"
        if check == "thread_resolved":
            want = args[1].lower() == "true" if len(args) > 1 else True
            resolved = service.comments.threads[args[0]].resolved
            return resolved == want, f"thread {args[0]} resolved={resolved}"
        if check == "fired":
            at = parse_time(args[1], line) if len(args) > 1 else None
            hits = [t for t, k in service.triggers.fired_log if k == args[0]]
            if at is None:
                return bool(hits), f"{args[0]} fired at {hits}"
            return at in hits, f"{args[0]} fired at {hits}, wanted {at}"
        if check == "fired_count":
            hits = [t for t, k in service.triggers.fired_log if k == args[0]]
            return len(hits) == int(args[1]), f"{args[0]} fired {len(hits)} times at {hits}"
        if check == "contributors":
            got = sorted(service.doc.contributors_since_trigger)
            want = sorted(args[0].split(",")) if args and args[0] != "none" else []
            return got == want, f"contributors {got}"
        if check == "run_outcomes":
            run = service.tasks.runs[args[0]]
            got = [s.outcome for s in run.segments]
            want = args[1].split(",") if len(args) > 1 and args[1] != "none" else []
            return got == want, f"run {args[0]} outcomes {got}"
        if check == "run_count":
            runs = service.tasks.runs_for(args[0])
            return len(runs) == int(args[1]), f"task {args[0]} has {len(runs)} runs"
        if check == "agent_count":
            return len(service.registry.all()) == int(args[0]), f"{len(service.registry.all())} agents"
        if check == "event_order":
            kinds = []
            for e in self.h.events:
                label = e["kind"]
                sub = e["payload"].get("event") if isinstance(e["payload"], dict) else None
                kinds.append(f"{label}.{sub}" if sub else label)
            positions = []
            cursor = 0
            for want in args:
                try:
                    cursor = kinds.index(want, cursor)
                except ValueError:
                    return False, f"{want} not found after position {cursor} in {kinds}"
                positions.append(cursor)
                cursor += 1
            return True, f"order positions {positions}"
        if check == "title_words_max":
            worst = max((len(t.title.split()) for t in service.tasks.all()), default=0)
            return worst <= int(args[0]), f"longest title has {worst} words"
        if check == "snapshot_roundtrip":
            return self._snapshot_roundtrip(service)
        if check == "convergence_fuzz":
            kwargs = _kwargs(args, line)
            if "edits" in kwargs:
                kwargs["edits_per_replica"] = kwargs.pop("edits")
            report = properties.convergence_report(**kwargs)
            return report["ok"], report["detail"]
        if check == "anchor_fuzz":
            report = properties.anchor_report(**_kwargs(args, line))
            return report["ok"], report["detail"]
        raise ScenarioError(line, f"unknown assertion {check!r}")

    def _snapshot_roundtrip(self, service) -> tuple[bool, str]:
        from ..service import DocumentService

        record = service.to_record()
        twin = DocumentService(
            doc_id=service.doc_id, goal_text="", join_code="",
            clock=service.clock, gateway=service.gateway,
            executor=service.executor, config=service.config, store=None,
        )
        twin.restore_record(json.loads(json.dumps(record)))
        ok = twin.to_record() == record
        return ok, "save->load reproduced the record" if ok else "reloaded record differs"


def run_scenario(
    path: str | Path,
    mock_rules: list[dict] | None = None,
    mock_script_path: str | None = None,
    seed: int = 0,
    data_dir: str | None = None,
) -> dict:
    text = Path(path).read_text()
    entries = parse_scenario(text)
    harness = SimHarness(
        mock_rules=mock_rules, mock_script_path=mock_script_path,
        seed=seed, data_dir=data_dir,
    )
    runner = ScenarioRunner(harness)
    report = runner.run_entries(entries)
    report["scenario"] = str(path)
    report["seed"] = seed
    report["action_log"] = runner.action_log
    return report


def replay_actions(
    actions: list[dict],
    mock_rules: list[dict] | None = None,
    mock_script_path: str | None = None,
    seed: int = 0,
    goal: str = "",
) -> dict:
    """Re-execute a recorded action log; returns the final snapshot hash."""
    harness = SimHarness(mock_rules=mock_rules, mock_script_path=mock_script_path, seed=seed)
    runner = ScenarioRunner(harness)
    if goal:
        runner._doc(goal=goal)
    for i, action in enumerate(actions, start=1):
        runner.execute_step({
            "line": i, "kind": "step", "at": action["at"],
            "client": action["client"], "action": action["action"], "args": action["args"],
        })
    service = runner._doc()
    return {
        "final_snapshot_sha256": harness.snapshot_hash(service),
        "events": len(harness.events),
    }
