import copy
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from composer_id.constants import (
    ARCH_CNN,
    BATCH_SIZE,
    EARLY_STOP_PATIENCE,
    LEARNING_RATE,
    MAX_EPOCHS,
    VARIANT_ALL_ROLLS,
)
from composer_id.dataset.clips import ClipSet, batch_iterator
from composer_id.nn.losses import softmax_crossentropy
from composer_id.nn.model import Model
from composer_id.nn.optim import AdamState, adam_step
from composer_id.repo.logs_repo import EpochRecord
from composer_id.services.evaluation import evaluate_clips

logger = logging.getLogger("composer_id.training")


@dataclass(frozen=True)
class TrainRunConfig:
    max_epochs: int = MAX_EPOCHS
    batch_size: int = BATCH_SIZE
    lr: float = LEARNING_RATE
    seed: int = 0
    early_stop_patience: int = EARLY_STOP_PATIENCE
    input_variant: str = VARIANT_ALL_ROLLS
    architecture: str = ARCH_CNN
    eval_batch_size: int = BATCH_SIZE

    def __post_init__(self) -> None:
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.early_stop_patience < 1:
            raise ValueError(f"early_stop_patience must be >= 1, got {self.early_stop_patience}")
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")


@dataclass
class TrainResult:
    """
    Outcome of ``train``.

    ``model`` holds the best-validation weights and ``state`` the optimizer
    state of that epoch. ``best_epoch`` is None when no epoch ran.
    """

    model: Model
    state: AdamState
    log: List[EpochRecord] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_val_macro: float = float("nan")


def train_epoch(model: Model, clips: ClipSet, state: AdamState, config: TrainRunConfig, epoch: int) -> float:
    """
    One pass over ``clips``; returns the mean training loss per clip.

    Raises
    ------
    RuntimeError
        If a batch loss is not finite.
    """
    total, seen = 0.0, 0
    for index, (x, y) in enumerate(batch_iterator(clips, config.batch_size, config.seed, epoch)):
        logits = model.forward(x, training=True)
        loss, grad = softmax_crossentropy(logits, y)
        if not np.isfinite(loss):
            raise RuntimeError(f"non-finite training loss {loss} at epoch {epoch + 1}, batch {index}")
        model.backward(grad.astype(logits.dtype, copy=False))
        params = model.parameters()
        adam_step({n: t.data for n, t in params.items()}, {n: t.grad for n, t in params.items()}, state)
        total += loss * len(y)
        seen += len(y)
        logger.debug("epoch %d batch %d loss %.6f", epoch + 1, index, loss)
    return total / seen


def train(
    config: TrainRunConfig, model: Model, train_clips: ClipSet, val_clips: ClipSet, composers: Sequence[str]
) -> TrainResult:
    """
    Train with Adam and plain cross entropy, keeping the best-validation weights.

    After each epoch the clip-level macro accuracy on ``val_clips`` is
    computed; the weights of the best epoch so far are kept, and training
    stops after ``early_stop_patience`` epochs without improvement or at
    ``max_epochs``.

    Parameters
    ----------
    config : TrainRunConfig
        Protocol settings.
    model : Model
        Freshly built model; trained in place and left with the best weights.
    train_clips, val_clips : ClipSet
        Training and validation clips.
    composers : sequence of str
        Class names by label.

    Returns
    -------
    TrainResult
    """
    if len(train_clips) == 0:
        raise ValueError("training set is empty")
    if config.max_epochs > 0 and len(val_clips) == 0:
        raise ValueError("validation set is empty; every composer needs at least 3 pieces")

    state = AdamState(lr=config.lr)
    result = TrainResult(model=model, state=copy.deepcopy(state))
    best_weights = model.state_dict()
    stale = 0

    for epoch in range(config.max_epochs):
        train_loss = train_epoch(model, train_clips, state, config, epoch)
        val_macro = evaluate_clips(model, val_clips, composers, config.eval_batch_size).macro_accuracy
        result.log.append(EpochRecord(epoch + 1, train_loss, val_macro))
        logger.info("Epoch %d: train_loss=%.4f val_macro_acc=%.4f", epoch + 1, train_loss, val_macro)

        if result.best_epoch is None or val_macro > result.best_val_macro:
            result.best_epoch = epoch + 1
            result.best_val_macro = val_macro
            result.state = copy.deepcopy(state)
            best_weights = model.state_dict()
            stale = 0
        else:
            stale += 1
            if stale >= config.early_stop_patience:
                logger.info("No improvement for %d epochs, stopping at epoch %d", stale, epoch + 1)
                break

    model.load_state_dict(best_weights)
    if result.best_epoch is not None:
        logger.info("Best epoch %d with val_macro_acc=%.4f", result.best_epoch, result.best_val_macro)
    return result
