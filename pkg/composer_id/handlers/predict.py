from pathlib import Path

from composer_id.config import RunSpec
from composer_id.constants import CMD_PREDICT
from composer_id.handler import Handler
from composer_id.services.experiment import load_catalog, load_trained_model
from composer_id.services.prediction import predict_file, top_composers


class PredictHandler(Handler):
    """
    Print the top composers of every clip of one file and of the whole piece.

    Composer names come from the manifest's top-k selection, the same one
    the checkpoint was trained on.
    """

    def __init__(self, echo):
        self.echo = echo

    def can_handle(self, spec: RunSpec) -> bool:
        return spec.command == CMD_PREDICT

    def handle(self, spec: RunSpec) -> bool:
        config = spec.load()
        if not config.input:
            raise ValueError("predict needs an input file")
        composers = load_catalog(config).composers
        model = load_trained_model(config, len(composers))
        prediction = predict_file(
            model,
            Path(config.input),
            config.variant,
            config.fps,
            config.clip_seconds,
            config.sustain_pedal,
            config.eval_batch_size,
        )

        for (start, end), probs in zip(prediction.windows, prediction.clip_probs):
            ranked = "\t".join(f"{name}:{p:.4f}" for name, p in top_composers(probs, composers))
            self.echo(f"clip {start:.1f}-{end:.1f}s\t{ranked}")
        ranked = "\t".join(f"{name}:{p:.4f}" for name, p in top_composers(prediction.piece_probs, composers))
        self.echo(f"piece\t{ranked}")
        return False
