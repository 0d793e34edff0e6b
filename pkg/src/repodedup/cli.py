"""Command-line entry points for the pipeline and its companion tools."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__, analysis, outputs, pipeline
from .config import ConfigError, load_config, validate
from .ingest import RejectLog


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Deduplicate forge repositories from relational dump files."""


def _load(config_path: str):
    try:
        return load_config(config_path)
    except ConfigError as err:
        raise click.ClickException(str(err))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--from", "from_stage", default=None, help="Resume from this stage.")
@click.option(
    "--stages",
    default=None,
    help="Comma-separated subset of stages to run (checkpoints of earlier stages must exist).",
)
def run(config_path: str, from_stage: str | None, stages: str | None) -> None:
    """Run the pipeline: ingest through deliverable files."""
    config = _load(config_path)
    subset = [s.strip() for s in stages.split(",")] if stages else None
    try:
        result = pipeline.run(config, from_stage=from_stage, stages=subset)
    except pipeline.PipelineError as err:
        raise click.ClickException(str(err))
    for stage in result.stages_run:
        click.echo(f"{stage}: {result.counters.get(stage, {})}")
    click.echo(f"deliverables in {result.work_dir}")


@main.command("validate")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def validate_cmd(config_path: str) -> None:
    """Check a config file; exit non-zero if it has problems."""
    findings = validate(_load(config_path))
    for finding in findings:
        click.echo(finding)
    if findings:
        sys.exit(1)
    click.echo("ok")


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--run-dir", "run_dir", default=None, type=click.Path(exists=True, file_okay=False))
@click.option("--listen", default="127.0.0.1:8000", help="host:port to serve on.")
@click.option("--session", default=None, type=click.Path(), help="Staged-rule session file.")
@click.option("--ui", default=None, type=click.Path(exists=True, file_okay=False), help="Static UI assets to serve.")
def inspect(config_path, run_dir, listen, session, ui) -> None:
    """Serve the inspection API over a finished run."""
    import uvicorn

    from .service import create_app

    if run_dir is None:
        if config_path is None:
            raise click.ClickException("pass --run-dir or --config")
        run_dir = _load(config_path).work_dir
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.ClickException(f"--listen expects host:port, got {listen!r}")
    try:
        app = create_app(Path(run_dir), session_path=session, static_dir=ui)
    except FileNotFoundError as err:
        raise click.ClickException(str(err))
    uvicorn.run(app, host=host, port=int(port))


@main.command()
@click.option("--map-a", required=True, type=click.Path(exists=True))
@click.option("--map-b", required=True, type=click.Path(exists=True))
@click.option("--external", default=None, type=click.Path(exists=True), help="Project list for the external-duplicates row.")
@click.option("--label-a", default="A")
@click.option("--label-b", default="B")
@click.option("--format", "fmt", type=click.Choice(["text", "kv"]), default="text")
def compare(map_a, map_b, external, label_a, label_b, fmt) -> None:
    """Compare two dedup mappings, Table-style."""
    rejects = RejectLog()
    mapping_a = outputs.read_dedup_map(map_a, rejects)
    mapping_b = outputs.read_dedup_map(map_b, rejects)
    names = _read_names(external) if external else None
    report_a, report_b = analysis.compare_datasets(mapping_a, mapping_b, names)
    if fmt == "text":
        click.echo(analysis.format_comparison(report_a, report_b, label_a, label_b), nl=False)
    else:
        click.echo(analysis.format_comparison_kv(report_a, report_b, label_a, label_b), nl=False)
    if rejects.count:
        click.echo(f"rejected {rejects.count} malformed map lines", err=True)


@main.command()
@click.argument("counts_file", type=click.Path(exists=True))
@click.option("--steps", default="10,25,50,60,75,90,95,99", help="Comma-separated percentiles.")
def percentiles(counts_file, steps) -> None:
    """Nearest-rank commit-count percentiles from a per-project count file."""
    counts = list(_read_counts(counts_file))
    table = analysis.commit_percentiles(counts, [float(s) for s in steps.split(",")])
    for p, threshold in table.rows:
        click.echo(f"{p:g}\t{threshold}")


@main.command("dedup-list")
@click.argument("project_list", type=click.Path(exists=True))
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--noise", "noise_path", required=True, type=click.Path(exists=True))
@click.option("--remapped-out", default=None, type=click.Path())
@click.option("--dropped-out", default=None, type=click.Path())
def dedup_list(project_list, map_path, noise_path, remapped_out, dropped_out) -> None:
    """Deduplicate an external project list; kept names go to stdout."""
    mapping = outputs.read_dedup_map(map_path)
    noise = outputs.read_noise(noise_path)
    result = analysis.dedup_external_list(_read_names(project_list), mapping, noise)
    for name in result.kept:
        click.echo(name)
    if remapped_out:
        Path(remapped_out).write_text(
            "".join(f"{a}\t{b}\n" for a, b in result.remapped), encoding="utf-8"
        )
    if dropped_out:
        Path(dropped_out).write_text(
            "".join(f"{n}\n" for n in result.dropped_as_noise), encoding="utf-8"
        )
    click.echo(
        f"kept {len(result.kept)}, remapped {len(result.remapped)}, "
        f"dropped {len(result.dropped_as_noise)} as noise, "
        f"{result.duplicates} duplicates collapsed",
        err=True,
    )


def _read_names(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as src:
        return [line.strip() for line in src if line.strip()]


def _read_counts(path):
    with open(path, "r", encoding="utf-8") as src:
        for line in src:
            parts = line.rstrip("\n").split("\t")
            if len(parts) >= 3:
                if parts[1] == "commits":
                    yield int(parts[2])
            elif len(parts) == 2:
                yield int(parts[1])


if __name__ == "__main__":
    main()
