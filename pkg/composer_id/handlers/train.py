
from composer_id.config import RunSpec
from composer_id.constants import CMD_TRAIN
from composer_id.handler import Handler
from composer_id.services.experiment import load_catalog, load_features, resolve_split, run_training


class TrainHandler(Handler):
    """
    Train on the training subset, select on validation macro accuracy and
    write the checkpoint and training log.
    """

    def __init__(self, echo):
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_TRAIN

    def handle(self, spec: RunSpec) -> bool:
        config = spec.load()
        catalog = load_catalog(config)
        records = load_features(config, catalog)
        split = resolve_split(config, catalog)
        result = run_training(config, catalog, split, records)
        if result.best_epoch is None:
            self.echo(f"No epochs run; initial weights saved to {config.checkpoint_path}")
        else:
            self.echo(
                f"Best epoch {result.best_epoch} of {len(result.log)} "
                f"(val macro {result.best_val_macro:.4f}); checkpoint {config.checkpoint_path}"
            )
        return False
