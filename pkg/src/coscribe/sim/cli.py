"""Command line: scenario runner plus admin commands against a server."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from ..errors import CoscribeError
from .scenario import ScenarioError, replay_actions, run_scenario


@click.group()
def main():
    """Collaborative document service tools."""


@main.command("run-scenario")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--mock-script", type=click.Path(exists=True, dir_okay=False), help="JSON mock rules for the model gateway.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Write the JSON report here.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), help="Write the replayable action log here.")
@click.option("--data-dir", type=click.Path(file_okay=False), help="Persist documents under this directory.")
def run_scenario_cmd(scenario, mock_script, seed, report_path, log_path, data_dir):
    """Execute a scenario file on a fresh in-process server."""
    try:
        report = run_scenario(
            scenario, mock_script_path=mock_script, seed=seed, data_dir=data_dir
        )
    except ScenarioError as e:
        click.echo(f"scenario error: {e}", err=True)
        sys.exit(2)
    for a in report["assertions"]:
        status = "PASS" if a["ok"] else "FAIL"
        click.echo(f"[{status}] line {a['line']}: {a['text']} ({a['detail']})")
    click.echo(
        f"{report['steps']} steps, {len(report['assertions'])} assertions, "
        f"{report['events']} events, snapshot {report['final_snapshot_sha256'][:12]}"
    )
    if log_path:
        with open(log_path, "w") as f:
            for action in report["action_log"]:
                f.write(json.dumps(action) + "\n")
    if report_path:
        Path(report_path).write_text(json.dumps(report, indent=2))
    sys.exit(0 if report["ok"] else 1)


@main.command("replay-log")
@click.argument("log_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mock-script", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--goal", default="", help="Document goal the recording started with.")
def replay_log_cmd(log_file, mock_script, seed, goal):
    """Re-execute a recorded action log; prints the final snapshot hash."""
    actions = [json.loads(line) for line in Path(log_file).read_text().splitlines() if line.strip()]
    try:
        result = replay_actions(actions, mock_script_path=mock_script, seed=seed, goal=goal)
    except CoscribeError as e:
        click.echo(f"replay failed: {e}", err=True)
        sys.exit(2)
    click.echo(result["final_snapshot_sha256"])


def _http(server: str):
    import httpx

    return httpx.Client(base_url=server.rstrip("/"), timeout=30)


def _admin_headers():
    token = os.environ.get("ADMIN_TOKEN", "")
    return {"X-Admin-Token": token} if token else {}


def _local_hub(data_dir):
    from ..gateway import Gateway, MockScript
    from ..service import Hub, InlineExecutor, ServiceConfig
    from ..store import DocumentStore

    return Hub(
        config=ServiceConfig.from_env(),
        gateway=Gateway(provider=MockScript([])),
        store=DocumentStore(data_dir),
        executor=InlineExecutor(),
    )


@main.command("create-doc")
@click.option("--goal", default="", help="Optional document goal text.")
@click.option("--server", default="http://127.0.0.1:8000", show_default=True)
@click.option("--in-process", is_flag=True, help="Operate on the data directory directly, no server.")
@click.option("--data-dir", type=click.Path(file_okay=False), help="Data directory for --in-process.")
def create_doc_cmd(goal, server, in_process, data_dir):
    """Create a document; prints its id and join code."""
    if in_process:
        hub = _local_hub(data_dir)
        existing = hub.store.list_ids()
        n = 1
        while f"doc{n}" in existing:
            n += 1
        service = hub.create_document(goal_text=goal, doc_id=f"doc{n}")
        click.echo(f"doc: {service.doc_id}")
        click.echo(f"join code: {service.join_code}")
        return
    with _http(server) as client:
        resp = client.post("/documents", json={"goal_text": goal}, headers=_admin_headers())
        if resp.status_code >= 400:
            click.echo(f"error {resp.status_code}: {resp.text}", err=True)
            sys.exit(1)
        data = resp.json()
    click.echo(f"doc: {data['doc']}")
    click.echo(f"join code: {data['join_code']}")


@main.command("list-docs")
@click.option("--server", default="http://127.0.0.1:8000", show_default=True)
@click.option("--in-process", is_flag=True, help="Operate on the data directory directly, no server.")
@click.option("--data-dir", type=click.Path(file_okay=False), help="Data directory for --in-process.")
def list_docs_cmd(server, in_process, data_dir):
    """List documents on the server."""
    if in_process:
        docs = _local_hub(data_dir).list_documents()
    else:
        with _http(server) as client:
            resp = client.get("/documents", headers=_admin_headers())
            if resp.status_code >= 400:
                click.echo(f"error {resp.status_code}: {resp.text}", err=True)
                sys.exit(1)
            docs = resp.json()
    for doc in docs:
        click.echo(f"{doc['doc']}  code={doc['join_code']}  members={doc['members']}  goal={doc['goal_text']!r}")


@main.command("dump-doc")
@click.argument("doc_ref")
@click.option("--server", default="http://127.0.0.1:8000", show_default=True)
@click.option("--in-process", is_flag=True, help="Operate on the data directory directly, no server.")
@click.option("--data-dir", type=click.Path(file_okay=False), help="Data directory for --in-process.")
def dump_doc_cmd(doc_ref, server, in_process, data_dir):
    """Print a document snapshot as JSON."""
    if in_process:
        try:
            service = _local_hub(data_dir).resolve(doc_ref)
        except CoscribeError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(1)
        click.echo(json.dumps(service.snapshot_payload(), indent=2))
        return
    with _http(server) as client:
        resp = client.get(f"/documents/{doc_ref}/snapshot")
        if resp.status_code >= 400:
            click.echo(f"error {resp.status_code}: {resp.text}", err=True)
            sys.exit(1)
        click.echo(json.dumps(resp.json(), indent=2))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--mock-script", type=click.Path(exists=True, dir_okay=False), help="Serve with the scripted mock gateway instead of a live model.")
@click.option("--data-dir", type=click.Path(file_okay=False), help="Overrides DATA_DIR.")
def serve_cmd(host, port, mock_script, data_dir):
    """Run the document server."""
    import uvicorn

    from ..server.app import build_app

    app = build_app(mock_script_path=mock_script, data_dir=data_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
