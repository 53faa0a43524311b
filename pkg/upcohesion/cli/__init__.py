"""
The `upcohesion` command line.

    upcohesion ingest program.pl
    upcohesion metric
    upcohesion whatif move-method m3 c1 --new
    upcohesion commit
    upcohesion bench --classes 200 --updates 20

Exit status is 0 on success, 1 for domain and validation errors and 2 for
file and parse errors; messages go to stderr.
"""
import json
import logging
import sys

import click

from ..bench import BenchParams, BenchRunner
from ..config import WORKSPACE_ENV, Settings, configure_logging
from ..engine import evaluate
from ..errors import UpCohesionError
from ..logic import render_ruleset
from ..metrics import MAPPINGS, METRICS, PROSE, get_metric, lcom1, lcom1_all, load_metric
from ..model import CohesionModel, ProgramElementFacts, derive_model
from ..parser import parse_constant
from ..refactoring import COMMANDS, ExistingClass, NewClass, parse_batch, run_batch, whatif
from ..statusmonitor import NullStatusMonitor, OneLineStatusMonitor
from ..transform import TransformOptions, render_transformed, transform
from ..version import __version__
from ..workspace import Workspace

logger = logging.getLogger(__name__)


class UpCohesionGroup(click.Group):
    """Turns package errors into an `error:` line and the error's exit code."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except UpCohesionError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(2)


class CliState:
    """Lazily loaded inputs shared by the subcommands of one invocation."""

    def __init__(self, settings: Settings, workspace: str, model_path: str, rules_path: str) -> None:
        self.settings = settings
        self.workspace = Workspace(workspace)
        self.model_path = model_path
        self.rules_path = rules_path

    def model(self) -> CohesionModel:
        if self.model_path:
            return CohesionModel.load(self.model_path)
        return self.workspace.load_model()

    def metric(self, name: str = "lcom1", mapping: str = PROSE):
        if self.rules_path:
            return load_metric(self.rules_path, mapping)
        return get_metric(name)


@click.group(cls=UpCohesionGroup)
@click.version_option(__version__, prog_name="upcohesion")
@click.option(
    "--workspace",
    envvar=WORKSPACE_ENV,
    default=None,
    type=click.Path(file_okay=False),
    help="Directory holding the ingested model and the pending what-if.",
)
@click.option(
    "--model",
    "model_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Read the cohesion model from this fact file instead of the workspace.",
)
@click.option(
    "--rules",
    "rules_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Metric rule file to use instead of the built-in LCOM1 rules.",
)
@click.option("-v", "--verbose", count=True, help="More logging; repeat for debug output.")
@click.pass_context
def cli(ctx, workspace, model_path, rules_path, verbose):
    """Cohesion metrics and refactoring what-ifs by update propagation."""
    settings = Settings.from_env()
    if verbose:
        configure_logging(logging.INFO if verbose == 1 else logging.DEBUG)
    else:
        configure_logging(settings.log_level)
    ctx.obj = CliState(settings, workspace or settings.workspace, model_path, rules_path)


@cli.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option(
    "--model-facts",
    is_flag=True,
    help="PATH already holds c/cm/cf/mf/mm facts rather than program element facts.",
)
@click.pass_obj
def ingest(state: CliState, path, model_facts):
    """Build the cohesion model from a fact file and store it."""
    if model_facts:
        model = CohesionModel.load(path)
    else:
        model = derive_model(ProgramElementFacts.load(path))
    state.workspace.save_model(model)
    for predicate, count in model.counts().items():
        click.echo(f"{predicate.name} {count}")


@cli.command()
@click.option("--metric", "metric_name", type=click.Choice(sorted(METRICS)), default="lcom1")
@click.option("--emit-up", is_flag=True, help="Print the generated update propagation rules.")
@click.option(
    "--no-effectiveness",
    is_flag=True,
    help="Leave out the effectiveness tests of the propagation rules.",
)
@click.pass_obj
def rules(state: CliState, metric_name, emit_up, no_effectiveness):
    """Print the metric rules, or the rules generated from them."""
    chosen = state.metric(metric_name)
    if emit_up:
        options = TransformOptions(effectiveness_tests=not no_effectiveness)
        click.echo(render_transformed(transform(chosen.rules, options)), nl=False)
    else:
        click.echo(render_ruleset(chosen.rules), nl=False)


@cli.command()
@click.option("--class", "class_id", default=None, help="Only this class.")
@click.option("--mapping", type=click.Choice(sorted(MAPPINGS)), default=PROSE)
@click.pass_obj
def metric(state: CliState, class_id, mapping):
    """Print LCOM1 per class, sorted by class id."""
    model = state.model()
    materialization = evaluate(state.metric(mapping=mapping).rules, model.facts)
    if class_id is None:
        click.echo(lcom1_all(materialization, mapping).lines(), nl=False)
    else:
        value = parse_constant(class_id)
        click.echo(f"{value} {lcom1(materialization, value, mapping)}")


@cli.command("whatif")
@click.argument("kind", type=click.Choice(sorted(COMMANDS)))
@click.argument("element")
@click.argument("source")
@click.option("--to", "target", default=None, help="Move into this existing class.")
@click.option("--new", "new", is_flag=True, help="Move into a new class.")
@click.option("--name", default=None, help="Id of the new class; drawn fresh when omitted.")
@click.option("--show-deltas", is_flag=True, help="Also print seeds and induced cp/lp deltas.")
@click.option("--mapping", type=click.Choice(sorted(MAPPINGS)), default=PROSE)
@click.pass_obj
def whatif_command(state: CliState, kind, element, source, target, new, name, show_deltas, mapping):
    """Predict the metric impact of moving a method or field."""
    if (target is None) == (not new):
        raise click.UsageError("give exactly one of --to CLASS and --new")
    if target is not None:
        destination = ExistingClass(parse_constant(target))
    else:
        destination = NewClass(None if name is None else parse_constant(name))
    spec = COMMANDS[kind](parse_constant(element), parse_constant(source), destination)
    model = state.model()
    metric_ = state.metric(mapping=mapping)
    report = whatif(
        model,
        metric_.rules,
        transform(metric_.rules),
        spec,
        mapping=mapping,
        prefix=state.settings.fresh_prefix,
    )
    click.echo(report.render(show_deltas), nl=False)
    if not state.model_path:
        state.workspace.save_pending(report.seeds, f"what-if {spec}")


@cli.command()
@click.pass_obj
def commit(state: CliState):
    """Apply the pending what-if to the stored model."""
    _, seeds = state.workspace.commit()
    click.echo(f"committed {len(seeds)} seed facts")
    for atom in seeds.prefixed_atoms():
        click.echo(f"  {atom}")


@cli.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--chain", is_flag=True, help="Apply each refactoring before analysing the next.")
@click.option("--show-deltas", is_flag=True)
@click.option("--mapping", type=click.Choice(sorted(MAPPINGS)), default=PROSE)
@click.pass_obj
def batch(state: CliState, path, chain, show_deltas, mapping):
    """Run the refactoring commands of a batch file as what-ifs."""
    with open(path) as handle:
        specs = parse_batch(handle.read())
    metric_ = state.metric(mapping=mapping)
    reports = run_batch(
        state.model(),
        metric_.rules,
        transform(metric_.rules),
        specs,
        chain=chain,
        mapping=mapping,
        prefix=state.settings.fresh_prefix,
    )
    for report in reports:
        click.echo(report.render(show_deltas), nl=False)


@cli.command("bench")
@click.option("--classes", type=int, default=200, show_default=True)
@click.option("--methods", type=int, default=10, show_default=True)
@click.option("--fields", type=int, default=10, show_default=True)
@click.option("--density", type=float, default=0.3, show_default=True)
@click.option("--updates", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=None, help="Trials run at once; UPCOHESION_JOBS when omitted.")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
@click.option("--progress", is_flag=True, help="Show a progress line on stderr.")
@click.pass_obj
def bench_command(state: CliState, classes, methods, fields, density, updates, seed, jobs, as_json, progress):
    """Compare incremental propagation against full recomputation."""
    params = BenchParams(classes, methods, fields, density, updates, seed)
    monitor = OneLineStatusMonitor if progress else NullStatusMonitor
    max_jobs = state.settings.jobs if jobs is None else jobs
    report = BenchRunner(params, status_monitor=monitor, max_jobs=max_jobs).run()
    if as_json:
        click.echo(json.dumps(report.to_json(), indent=2))
    else:
        click.echo(report.render(), nl=False)


def run_cli(argv=None) -> int:
    """
    Run the command line and return its exit status instead of exiting.

    Arguments:
        argv (List[str]: None): Arguments without the program name

    Returns:
        int: 0, 1 or 2

    """
    try:
        code = cli.main(args=argv, prog_name="upcohesion", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    return code if isinstance(code, int) else 0


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
