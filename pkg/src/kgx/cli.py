"""Command-line entry points: ingest, serve, ask, tool.

Exit codes are a stable contract: 0 success, 1 runtime failure, 2 usage
error.  Structured output (reports, answers, tool results) goes to
stdout; trace and error lines go to stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .agent import CallEvent, ResultEvent, render_answer, serialize_session
from .config import load_config
from .engine import Engine, ingest_files
from .errors import KgxError
from .service import serve as serve_app
from .tools import ToolCall


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Agentic knowledge-graph retrieval engine."""


@main.command()
@click.option("--corpus", required=True, type=click.Path(), help="Publication records, one JSON object per line.")
@click.option("--thesaurus", type=click.Path(), default=None, help="Thesaurus entries, one JSON object per line.")
@click.option("--out", required=True, type=click.Path(), help="Snapshot file to write.")
@click.option("--force", is_flag=True, help="Overwrite an existing snapshot.")
@click.option("--year-from", type=int, default=None, help="Drop records published before this year.")
@click.option("--year-to", type=int, default=None, help="Drop records published after this year.")
@click.option("--config", "config_path", envvar="KGX_CONFIG", type=click.Path(), default=None)
def ingest(corpus, thesaurus, out, force, year_from, year_to, config_path) -> None:
    """Build a snapshot from corpus + thesaurus files and print the report."""
    out_path = Path(out)
    if out_path.exists() and not force:
        _fail(f"snapshot {out} already exists; pass --force to overwrite")
    if (year_from is None) != (year_to is None):
        raise click.UsageError("--year-from and --year-to must be given together")
    window = (year_from, year_to) if year_from is not None else None

    try:
        config = load_config(config_path)
        engine, report = ingest_files(corpus, thesaurus, config, year_window=window)
        engine.save(out_path)
    except (KgxError, ValueError) as exc:
        _fail(str(exc))
        return

    width = max([len("label"), *(len(l) for l in report.nodes_by_label)], default=5)
    click.echo(f"{'label':<{width}}  {'count':>8}  {'%':>5}")
    for label, count, pct in report.table():
        click.echo(f"{label:<{width}}  {count:>8}  {pct:>5.1f}")
    click.echo(f"total nodes: {report.total_nodes}")
    click.echo(f"total edges: {report.total_edges}")
    click.echo(f"chunks: {len(report.chunks)}")
    click.echo(f"snapshot written to {out}")
    for line in report.errors:
        click.echo(f"warning: {line}", err=True)


@main.command()
@click.option("--snapshot", required=True, type=click.Path(), help="Snapshot file to serve.")
@click.option("--host", default=None, help="Bind address (overrides config).")
@click.option("--port", type=int, default=None, help="Port (overrides config).")
@click.option("--config", "config_path", envvar="KGX_CONFIG", type=click.Path(), default=None)
def serve(snapshot, host, port, config_path) -> None:
    """Serve the exploration API over a snapshot."""
    try:
        config = load_config(config_path)
        if host is not None:
            config.host = host
        if port is not None:
            config.port = port
        config.validate()
        engine = Engine.from_snapshot(snapshot, config)
    except (KgxError, OSError, ValueError) as exc:
        _fail(str(exc))
        return
    serve_app(engine, config)


@main.command()
@click.argument("question")
@click.option("--snapshot", required=True, type=click.Path())
@click.option("--policy", "policy_spec", required=True, help="scripted:<file> or external:<endpoint>.")
@click.option("--trace", is_flag=True, help="Print one line per tool call to stderr.")
@click.option("--transcript", "transcript_out", type=click.Path(), default=None, help="Also write the full transcript to this file.")
@click.option("--config", "config_path", envvar="KGX_CONFIG", type=click.Path(), default=None)
def ask(question, snapshot, policy_spec, trace, transcript_out, config_path) -> None:
    """Run one agent session and print the answer document as JSON."""
    if not policy_spec.startswith(("scripted:", "external:")):
        raise click.UsageError(f"unknown policy kind in {policy_spec!r}")
    try:
        config = load_config(config_path)
        engine = Engine.from_snapshot(snapshot, config)
        policy = engine.make_policy(policy_spec)
        session = engine.loop.run(question, policy)
    except (KgxError, OSError, ValueError) as exc:
        _fail(str(exc))
        return

    if trace:
        calls = {
            e.call.call_id: e.call
            for e in session.transcript
            if isinstance(e, CallEvent)
        }
        for event in session.transcript:
            if isinstance(event, ResultEvent):
                call = calls.get(event.result.call_id)
                name = call.tool_name if call else "?"
                click.echo(
                    f"{event.result.call_id} {name} {event.result.status} "
                    f"{event.result.elapsed:.3f}s",
                    err=True,
                )

    if transcript_out is not None:
        Path(transcript_out).write_text(
            json.dumps(serialize_session(session), indent=2, ensure_ascii=False),
            "utf-8",
        )

    click.echo(json.dumps(render_answer(session), indent=2, ensure_ascii=False))
    if session.status == "failed":
        sys.exit(1)


@main.command()
@click.argument("name")
@click.option("--snapshot", required=True, type=click.Path())
@click.option("--args", "args_json", default="{}", help="Tool arguments as a JSON object.")
@click.option("--config", "config_path", envvar="KGX_CONFIG", type=click.Path(), default=None)
def tool(name, snapshot, args_json, config_path) -> None:
    """Invoke one tool directly and print its result as JSON."""
    try:
        args = json.loads(args_json)
    except ValueError as exc:
        raise click.UsageError(f"--args is not valid JSON: {exc}") from exc
    if not isinstance(args, dict):
        raise click.UsageError("--args must be a JSON object")

    try:
        config = load_config(config_path)
        engine = Engine.from_snapshot(snapshot, config)
    except (KgxError, OSError, ValueError) as exc:
        _fail(str(exc))
        return

    result = engine.runner.dispatch(ToolCall(tool_name=name, args=args, call_id="cli-1"))
    click.echo(json.dumps(result.to_dict(), indent=2, ensure_ascii=False))
    if result.status != "ok":
        code = (result.error or {}).get("code")
        sys.exit(2 if code in ("ARG_SCHEMA", "UNKNOWN_TOOL") else 1)


if __name__ == "__main__":
    main()
