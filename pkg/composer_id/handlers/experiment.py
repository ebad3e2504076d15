from composer_id.config import RunSpec
from composer_id.constants import CMD_EXPERIMENT
from composer_id.handler import Handler
from composer_id.services.experiment import run_experiment


class ExperimentHandler(Handler):
    """One grid cell end to end: split, features, training, evaluation, reports."""

    def __init__(self, echo):
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_EXPERIMENT

    def handle(self, spec: RunSpec) -> bool:
        config = spec.load()
        result = run_experiment(config)
        self.echo(
            f"{config.arch} / {config.variant} / k={config.k}: "
            f"clip macro {result.clip_report.macro_accuracy:.4f}, "
            f"piece macro {result.piece_report.macro_accuracy:.4f}; outputs in {config.out_path}"
        )
        return False
