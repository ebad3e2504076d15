import logging
import os
from typing import Any, Callable, Dict, Tuple

import click
from dotenv import load_dotenv

from composer_id.config import RunSpec
from composer_id.constants import (
    ARCHITECTURES,
    CMD_EVAL,
    CMD_EXPERIMENT,
    CMD_EXTRACT,
    CMD_INGEST,
    CMD_PREDICT,
    CMD_SPLIT,
    CMD_SUMMARIZE,
    CMD_TRAIN,
    VARIANTS,
)
from composer_id.dispatcher import Dispatcher
from composer_id.handlers.evaluate import EvaluateHandler
from composer_id.handlers.experiment import ExperimentHandler
from composer_id.handlers.extract import ExtractHandler
from composer_id.handlers.ingest import IngestHandler
from composer_id.handlers.predict import PredictHandler
from composer_id.handlers.split import SplitHandler
from composer_id.handlers.summarize import SummarizeHandler
from composer_id.handlers.train import TrainHandler

logger = logging.getLogger("composer_id")

# named flags and the config keys they override, applied after --set
FLAG_KEYS = ("seed", "k", "arch", "variant", "fps", "out_dir")


def setup_logging() -> logging.Logger:
    """
    Configure root logger for the toolkit.

    Uses single env variable LOG_LEVEL: DEBUG, INFO, WARNING, ERROR, CRITICAL.

    Returns
    -------
    logging.Logger
        Configured logger instance for the toolkit.
    """
    level_name = os.getenv("LOG_LEVEL", "INFO").upper()
    level = getattr(logging, level_name, logging.INFO)

    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    return logging.getLogger("composer_id")


def build_dispatcher(echo: Callable[[str], None]) -> Dispatcher:
    dispatcher = Dispatcher()
    dispatcher.add_handler(IngestHandler(echo))
    dispatcher.add_handler(ExtractHandler(echo))
    dispatcher.add_handler(SplitHandler(echo))
    dispatcher.add_handler(TrainHandler(echo))
    dispatcher.add_handler(EvaluateHandler(echo))
    dispatcher.add_handler(PredictHandler(echo))
    dispatcher.add_handler(ExperimentHandler(echo))
    dispatcher.add_handler(SummarizeHandler(echo))
    return dispatcher


def run_options(func):
    """Options shared by every command."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key = value config file."),
        click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override a config key."),
        click.option("--seed", type=click.IntRange(min=0), help="Split, initialization and shuffling seed."),
        click.option("--k", type=click.IntRange(min=1), help="Number of composers (10 or 100 in the grid)."),
        click.option("--arch", type=click.Choice(ARCHITECTURES), help="Model architecture."),
        click.option("--variant", type=click.Choice(VARIANTS), help="Input representation."),
        click.option("--fps", type=click.IntRange(min=1), help="Piano-roll frames per second."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def run(command: str, options: Dict[str, Any], extra: Tuple[str, ...] = (), paths: Tuple[str, ...] = ()) -> None:
    """Build the run spec of a command and hand it to the dispatcher."""
    overrides = [*options["overrides"], *extra]
    overrides += [f"{key}={options[key]}" for key in FLAG_KEYS if options[key] is not None]
    try:
        spec = RunSpec(command, options["config_path"], tuple(overrides), paths)
        build_dispatcher(click.echo).dispatch(spec)
    except (ValueError, RuntimeError, OSError) as exc:
        logger.error("%s failed: %s", command, exc)
        raise click.ClickException(str(exc)) from exc


@click.group()
def cli() -> None:
    """Composer classification: ingest, extract, split, train, eval, predict."""
    load_dotenv()
    setup_logging()


@cli.command(CMD_INGEST)
@run_options
def ingest(**options: Any) -> None:
    """Parse midi_dir into the catalog manifest."""
    run(CMD_INGEST, options)


@cli.command(CMD_EXTRACT)
@run_options
def extract(**options: Any) -> None:
    """Write the feature cache of the manifest."""
    run(CMD_EXTRACT, options)


@cli.command(CMD_SPLIT)
@run_options
def split(**options: Any) -> None:
    """Stratified 8:1:1 split of the top-k composers."""
    run(CMD_SPLIT, options)


@cli.command(CMD_TRAIN)
@run_options
def train(**options: Any) -> None:
    """Train a model and keep the best-validation checkpoint."""
    run(CMD_TRAIN, options)


@cli.command(CMD_EVAL)
@run_options
def evaluate(**options: Any) -> None:
    """Write clip-wise and piece-wise test reports."""
    run(CMD_EVAL, options)


@cli.command(CMD_PREDICT)
@click.argument("input_file", required=False, type=click.Path(dir_okay=False))
@run_options
def predict(input_file: str, **options: Any) -> None:
    """Top composers of a MIDI (or WAV) file."""
    run(CMD_PREDICT, options, extra=(f"input={input_file}",) if input_file else ())


@cli.command(CMD_EXPERIMENT)
@run_options
def experiment(**options: Any) -> None:
    """Split, extract, train and evaluate one grid cell."""
    run(CMD_EXPERIMENT, options)


@cli.command(CMD_SUMMARIZE)
@click.argument("run_dirs", nargs=-1, type=click.Path(file_okay=False))
@run_options
def summarize(run_dirs: Tuple[str, ...], **options: Any) -> None:
    """Tabulate finished experiment directories."""
    run(CMD_SUMMARIZE, options, paths=tuple(run_dirs))


def main() -> None:
    """Entry point: env → logging → click commands → dispatcher."""
    cli(prog_name="composer_id")


if __name__ == "__main__":
    main()
