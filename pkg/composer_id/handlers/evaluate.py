from composer_id.config import RunSpec
from composer_id.constants import CMD_EVAL
from composer_id.handler import Handler
from composer_id.services.experiment import (
    load_catalog,
    load_features,
    load_trained_model,
    resolve_split,
    run_evaluation,
)


class EvaluateHandler(Handler):
    """Clip-wise and piece-wise test reports of a saved checkpoint."""

    def __init__(self, echo):
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_EVAL

    def handle(self, spec: RunSpec) -> bool:
        config = spec.load()
        catalog = load_catalog(config)
        records = load_features(config, catalog)
        split = resolve_split(config, catalog)
        model = load_trained_model(config, len(catalog.composer_index))
        clips, pieces = run_evaluation(config, catalog, split, records, model)
        self.echo(
            f"Clip macro {clips.macro_accuracy:.4f} (micro {clips.micro_accuracy:.4f}), "
            f"piece macro {pieces.macro_accuracy:.4f}; reports in {config.out_path}"
        )
        return False
