"""Command-line pipeline: validate, ingest, fit, heatmap, evaluate, chain,
simulate, and serve.

Exit codes: 0 on success, 1 on validation failure, 2 on I/O or format
errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import executor as ex
from .bim import SchemaViolation, load_task_model
from .chaining import (
    backend_for_model,
    chain_task,
    evaluation_report,
    fit_named,
    kernel_backend,
    load_model,
    save_model,
    transition_heatmap,
)
from .chaining.transition import TransitionModel
from .ingest import (
    EmptySequence,
    LlmExtractor,
    RuleBasedExtractor,
    Transcript,
    extract_actions,
    load_corpus,
    save_corpus,
)
from .ingest.extraction import ActionSequence, Corpus
from .llm import HttpLlmClient, TransportError
from .skill_kb import (
    SkillLibrary,
    builtin_library_path,
    check_chain_continuity,
    load_library,
    validate_library,
)

VALIDATION_FAILURE = 1
IO_FAILURE = 2


def _load_library_arg(value: str) -> SkillLibrary:
    path = Path(value)
    if not path.exists() and not value.endswith(".json"):
        path = builtin_library_path(value)
    return load_library(path)


@click.group()
def cli():
    """Micro-skill chaining pipeline."""


@cli.command()
@click.argument("library")
def validate(library: str):
    """Check a skill library against the database rules."""
    lib = _load_library_arg(library)
    report = validate_library(lib)
    if report.ok:
        click.echo(f"ok: {len(lib.skills)} skills, no violations")
        return
    for v in report.violations:
        click.echo(f"{v.rule.value}: {', '.join(v.skill_ids)}: {v.message}")
    raise SystemExit(VALIDATION_FAILURE)


@cli.command()
@click.argument("transcripts", nargs=-1, required=True)
@click.option("--library", default="drywall", help="library file or builtin name")
@click.option("--backend", "backend_name", type=click.Choice(["rule", "llm"]), default="rule")
@click.option("--task-label", default="")
@click.option("--out", type=click.Path(), required=True, help="corpus output (JSON lines)")
def ingest(transcripts, library, backend_name, task_label, out):
    """Extract canonical action sequences from tutorial text files."""
    lib = _load_library_arg(library)
    backend = RuleBasedExtractor() if backend_name == "rule" else LlmExtractor(HttpLlmClient())
    sequences = []
    for tpath in transcripts:
        text = Path(tpath).read_text(encoding="utf-8")
        transcript = Transcript(source_id=Path(tpath).name, task_label=task_label, text=text)
        try:
            seq, report = extract_actions(transcript, backend, lib)
        except EmptySequence as exc:
            click.echo(f"{tpath}: no mappable steps ({len(exc.unmapped)} unmapped)", err=True)
            raise SystemExit(VALIDATION_FAILURE)
        sequences.append(seq)
        click.echo(
            f"{tpath}: {len(seq.tokens)} actions, in-list fraction {report.in_list_fraction:.3f}"
        )
    save_corpus(Corpus(tuple(sequences)), out)
    click.echo(f"wrote {len(sequences)} sequences to {out}")


@cli.command()
@click.argument("corpus_path", metavar="CORPUS")
@click.option("--model", "kind", type=click.Choice(["transition", "chowliu", "hmm"]), required=True)
@click.option("--states", default=2, help="hidden states (hmm)")
@click.option("--iters", default=100, help="max iterations (hmm)")
@click.option("--tol", default=1e-6, help="stopping tolerance (hmm)")
@click.option("--seed", default=0, help="initialization seed (hmm)")
@click.option("--out", type=click.Path(), required=True)
def fit(corpus_path, kind, states, iters, tol, seed, out):
    """Fit a chaining model on a corpus file."""
    corpus = load_corpus(corpus_path)
    if kind == "hmm":
        model = fit_named(kind, corpus, n_states=states, max_iters=iters, tol=tol, seed=seed)
    else:
        model = fit_named(kind, corpus)
    save_model(model, out)
    click.echo(f"fitted {kind} model ({kernel_backend()} kernels) -> {out}")


@cli.command()
@click.argument("model_path", metavar="MODEL")
@click.option("--out", type=click.Path(), default=None, help="CSV output path (default stdout)")
def heatmap(model_path, out):
    """Emit a fitted transition model's probability matrix as CSV."""
    model = load_model(model_path)
    if not isinstance(model, TransitionModel):
        click.echo("heatmap needs a transition model", err=True)
        raise SystemExit(VALIDATION_FAILURE)
    text = transition_heatmap(model, out)
    if out is None:
        click.echo(text, nl=False)
    else:
        click.echo(f"wrote heatmap to {out}")


@cli.command()
@click.argument("model_path", metavar="MODEL")
@click.argument("corpus_path", metavar="CORPUS")
@click.option("--out", type=click.Path(), default=None, help="JSON report path")
def evaluate(model_path, corpus_path, out):
    """Next-action accuracy of a fitted model over a corpus."""
    backend = backend_for_model(load_model(model_path))
    corpus = load_corpus(corpus_path)
    report = evaluation_report(backend, corpus)
    click.echo(json.dumps(report))
    if out:
        Path(out).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")


@cli.command()
@click.argument("model_path", metavar="MODEL")
@click.option("--library", default="drywall")
@click.option("--start", "start_token", default="start")
@click.option("--max-len", default=16)
def chain(model_path, library, start_token, max_len):
    """Roll out a continuity-guarded skill chain from a fitted model."""
    lib = _load_library_arg(library)
    backend = backend_for_model(load_model(model_path))
    tokens = chain_task(backend, lib, start_token, max_len)
    click.echo(" -> ".join(tokens))


@cli.command()
@click.argument("sequence", nargs=-1, required=True)
@click.option("--library", default="drywall")
@click.option("--task", "task_path", type=click.Path(exists=True), required=True)
@click.option("--supervisor", default="cli")
def simulate(sequence, library, task_path, supervisor):
    """Bind, approve, and run a skill chain, auto-confirming every gate."""
    lib = _load_library_arg(library)
    task = load_task_model(Path(task_path).read_text(encoding="utf-8"))
    from .skill_kb import canonicalize

    tokens = []
    for name in sequence:
        token = canonicalize(name, lib)
        if token is None:
            click.echo(f"unknown skill {name!r}", err=True)
            raise SystemExit(VALIDATION_FAILURE)
        tokens.append(token)
    try:
        plan = ex.build_plan(lib, task, tokens, task_label="cli")
    except ex.DiscontinuousPlan as exc:
        click.echo(f"discontinuous at step {exc.first_break}", err=True)
        raise SystemExit(VALIDATION_FAILURE)
    session = ex.start(ex.approve(plan, supervisor), ex.initial_world_from_task(task))
    while session.status in (ex.Status.RUNNING, ex.Status.AWAITING_HUMAN):
        if session.status is ex.Status.AWAITING_HUMAN:
            ex.confirm_gate(session, supervisor)
        else:
            ex.advance(session)
    for event in session.events:
        click.echo(json.dumps(event.to_json()))
    if session.status is not ex.Status.COMPLETED:
        raise SystemExit(VALIDATION_FAILURE)


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000)
@click.option("--library", default="drywall")
@click.option("--task", "task_path", type=click.Path(exists=True), default=None)
@click.option(
    "--model",
    "model_specs",
    multiple=True,
    help="chaining backend as name=path; repeatable",
)
def serve(host, port, library, task_path, model_specs):
    """Run the supervision HTTP service."""
    import uvicorn

    from .service import create_app

    lib = _load_library_arg(library)
    task = (
        load_task_model(Path(task_path).read_text(encoding="utf-8")) if task_path else None
    )
    models = {}
    for spec in model_specs:
        name, _, path = spec.partition("=")
        if not path:
            click.echo(f"--model wants name=path, got {spec!r}", err=True)
            raise SystemExit(IO_FAILURE)
        models[name] = backend_for_model(load_model(path))
    app = create_app(lib, task=task, models=models)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main():
    try:
        cli(standalone_mode=False)
    except SystemExit:
        raise
    except click.ClickException as exc:
        exc.show()
        sys.exit(IO_FAILURE)
    except click.exceptions.Abort:
        sys.exit(IO_FAILURE)
    except (OSError, json.JSONDecodeError, SchemaViolation, TransportError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(IO_FAILURE)
    except (ValueError, KeyError, RuntimeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(VALIDATION_FAILURE)


if __name__ == "__main__":
    main()
