"""Command-line entry points: ``taskctl``, ``analyzectl`` and ``studyserver``."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .analytics import (AnalyticsError, cronbach_alpha, derive_metrics,
                        kendall_tau, pearson, spearman, welch_anova)
from .circuit import assignment_to_string, enumerate_solutions, truth_table
from .tasks import (DesignConstraints, Task, load_library, parse_task,
                    validate_task)


def _load_tasks(path: Path) -> list[Task]:
    """A path is either one task file or a library directory with a manifest."""
    if path.is_dir():
        return load_library(path).tasks()
    return [parse_task(path.read_bytes())]


@click.group()
def taskctl():
    """Inspect and validate circuit task files."""


@taskctl.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
@click.option("--min-nl", type=int, default=1, show_default=True,
              help="Minimum nonlinearity required of every output function.")
@click.option("--min-pair", type=int, default=1, show_default=True,
              help="Minimum pairwise distance between output functions.")
def validate(path: Path, min_nl: int, min_pair: int):
    """Validate one task file or a whole library directory."""
    constraints = DesignConstraints(min_io_nonlinearity=min_nl,
                                    min_output_pair_distance=min_pair)
    failed = False
    for task in _load_tasks(path):
        report = validate_task(task, constraints)
        if report.ok:
            click.echo(f"{task.id}: ok")
        else:
            failed = True
            click.echo(f"{task.id}: FAIL")
            for violation in report.violations:
                click.echo(f"  - {violation.message}")
    sys.exit(1 if failed else 0)


@taskctl.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
def solutions(path: Path):
    """Print the solution set of each task as switch-assignment strings."""
    for task in _load_tasks(path):
        sols = sorted(assignment_to_string(a)
                      for a in enumerate_solutions(task.netlist))
        click.echo(f"{task.id}: {{{','.join(sols)}}}")


@taskctl.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
def table(path: Path):
    """Print the truth table of every output of each task."""
    for task in _load_tasks(path):
        tables = truth_table(task.netlist)
        click.echo(f"{task.id}:")
        n = len(task.netlist.inputs)
        header = " ".join(task.netlist.inputs) + " | " + " ".join(task.netlist.outputs)
        click.echo(f"  {header}")
        for index in range(2 ** n):
            bits = format(index, f"0{n}b")
            row = " ".join(str(tables[o][index]) for o in task.netlist.outputs)
            click.echo(f"  {' '.join(bits)} | {row}")


@click.group()
def analyzectl():
    """Derive performance metrics and statistics from study logs."""


@analyzectl.command()
@click.argument("logdir", type=click.Path(exists=True, file_okay=False, path_type=Path))
def metrics(logdir: Path):
    """Per-participant task metrics from a directory of session logs, as CSV."""
    writer = csv.writer(sys.stdout)
    writer.writerow(["pseudonym", "task_id", "solved", "solved_first_attempt",
                     "brute_forced", "skipped", "time_in_task", "attempts"])
    for log_path in sorted(logdir.glob("*.ndjson")):
        records = [json.loads(line) for line in log_path.read_text().splitlines() if line]
        pseudonym = records[0]["pseudonym"] if records else log_path.stem
        for m in derive_metrics(records):
            writer.writerow([pseudonym, m.task_id, int(m.solved),
                             int(m.solved_first_attempt), int(m.brute_forced),
                             int(m.skipped),
                             "" if m.time_in_task is None else f"{m.time_in_task:.3f}",
                             m.attempts])


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise click.ClickException("CSV needs a header and at least one data row")
    return rows[0], rows[1:]


@analyzectl.command()
@click.argument("csvfile", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--pearson", "method", flag_value="pearson", default=True)
@click.option("--spearman", "method", flag_value="spearman")
@click.option("--kendall", "method", flag_value="kendall")
@click.option("--alpha", "method", flag_value="alpha")
@click.option("--welch", "method", flag_value="welch")
def stats(csvfile: Path, method: str):
    """One statistic over a CSV (schemas in docs/analysis.md).

    Pair statistics use the first two numeric columns; --alpha treats every
    column as one item; --welch expects (group, value) columns.
    """
    header, rows = _read_csv(csvfile)
    try:
        if method == "alpha":
            items = [[float(v) for v in row] for row in rows]
            click.echo(f"alpha {cronbach_alpha(items):.6f}")
        elif method == "welch":
            groups: dict[str, list[float]] = {}
            for row in rows:
                groups.setdefault(row[0], []).append(float(row[1]))
            f_stat, df1, df2 = welch_anova(list(groups.values()))
            click.echo(f"F {f_stat:.6f} df_between {df1:.0f} df_within {df2:.3f}")
        else:
            x = [float(row[0]) for row in rows]
            y = [float(row[1]) for row in rows]
            fn = {"pearson": pearson, "spearman": spearman, "kendall": kendall_tau}[method]
            click.echo(f"{method} {fn(x, y):.6f}")
    except (AnalyticsError, ValueError) as exc:
        raise click.ClickException(str(exc))


@click.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Study configuration YAML; default: bundled study.")
@click.option("--data-dir", type=click.Path(path_type=Path), default=None,
              help="Session log directory; default: $STUDY_DATA_DIR or ./study-data.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def studyserver(config_path: Path | None, data_dir: Path | None, host: str, port: int):
    """Run the HTTP study host."""
    import uvicorn

    from .server import create_app, default_studies, load_studies

    studies = load_studies(config_path) if config_path else default_studies()
    app = create_app(studies, data_dir=data_dir)
    uvicorn.run(app, host=host, port=port)
