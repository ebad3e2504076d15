import logging
from pathlib import Path

from composer_id.config import RunSpec, load_config
from composer_id.constants import CLIP_REPORT_FILE, CMD_SUMMARIZE, CONFIG_FILE, PIECE_REPORT_FILE
from composer_id.handler import Handler
from composer_id.services.reports import read_report_metrics, render_grid

logger = logging.getLogger("composer_id.summarize")


class SummarizeHandler(Handler):
    """
    Tabulate finished experiment directories: one row of macro accuracies
    per run, then the clip-wise accuracy of every composer per run.
    """

    def __init__(self, echo):
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_SUMMARIZE

    def handle(self, spec: RunSpec) -> bool:
        if not spec.paths:
            raise ValueError("summarize needs at least one experiment directory")
        runs = []
        for run_dir in map(Path, spec.paths):
            config = load_config(str(run_dir / CONFIG_FILE))
            clip_metrics, per_composer = read_report_metrics(run_dir / CLIP_REPORT_FILE)
            piece_metrics, _ = read_report_metrics(run_dir / PIECE_REPORT_FILE)
            runs.append(
                {
                    "arch": config.arch,
                    "variant": config.variant,
                    "k": config.k,
                    "clip_macro": clip_metrics["macro_accuracy"],
                    "piece_macro": piece_metrics["macro_accuracy"],
                    "per_composer": per_composer,
                }
            )
            logger.debug("Collected %s", run_dir)
        self.echo(render_grid(runs).rstrip("\n"))
        return False
