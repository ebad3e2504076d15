import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from composer_id.dataset.clips import ClipSet
from composer_id.nn.model import Model

logger = logging.getLogger("composer_id.evaluation")

GRANULARITY_CLIP = "clip"
GRANULARITY_PIECE = "piece"


@dataclass(frozen=True)
class EvalReport:
    """
    Accuracy figures of one evaluation at clip or piece granularity.

    ``per_composer_accuracy`` lists only composers with at least one
    evaluated item; ``macro_accuracy`` is their unweighted mean. The
    confusion matrix spans every class: ``confusion[i][j]`` counts items of
    composer ``i`` predicted as ``j``.
    """

    granularity: str
    composers: Tuple[str, ...]
    per_composer_accuracy: Tuple[Tuple[str, float], ...]
    macro_accuracy: float
    micro_accuracy: float
    confusion: np.ndarray
    clip_count: int
    piece_count: int
    piece_macro_accuracy: Optional[float] = None

    @property
    def item_count(self) -> int:
        return int(self.confusion.sum())


def check_labels(labels: np.ndarray, num_classes: int) -> None:
    bad = sorted({int(label) for label in labels if label < 0 or label >= num_classes})
    if bad:
        raise ValueError(f"labels {bad} are outside the model's {num_classes} classes")


def score(
    predictions: np.ndarray,
    labels: np.ndarray,
    composers: Sequence[str],
    granularity: str,
    clip_count: int,
    piece_count: int,
) -> EvalReport:
    """
    Build an ``EvalReport`` from predicted and true labels.

    Parameters
    ----------
    predictions, labels : np.ndarray
        Predicted and true class indices of each item.
    composers : sequence of str
        Class names by label.
    granularity : str
        ``clip`` or ``piece``.
    clip_count, piece_count : int
        Sizes recorded in the report.

    Returns
    -------
    EvalReport
    """
    n_classes = len(composers)
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    check_labels(labels, n_classes)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (labels, predictions), 1)

    per_composer = []
    for i, name in enumerate(composers):
        total = confusion[i].sum()
        if total:
            per_composer.append((name, float(confusion[i, i] / total)))
    macro = float(np.mean([acc for _, acc in per_composer])) if per_composer else 0.0
    micro = float(np.trace(confusion) / confusion.sum()) if confusion.sum() else 0.0
    return EvalReport(
        granularity=granularity,
        composers=tuple(composers),
        per_composer_accuracy=tuple(per_composer),
        macro_accuracy=macro,
        micro_accuracy=micro,
        confusion=confusion,
        clip_count=clip_count,
        piece_count=piece_count,
        piece_macro_accuracy=macro if granularity == GRANULARITY_PIECE else None,
    )


def aggregate_pieces(
    probs: np.ndarray, labels: np.ndarray, source_ids: Sequence[str]
) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """
    Average clip probability vectors per piece.

    Returns
    -------
    tuple
        ``(piece_ids, mean_probs P x C, piece_labels P)``, pieces in order
        of first appearance.
    """
    groups: Dict[str, List[int]] = {}
    for i, sid in enumerate(source_ids):
        groups.setdefault(sid, []).append(i)
    piece_ids = list(groups)
    mean_probs = np.stack([probs[idx].mean(axis=0) for idx in groups.values()]) if groups else probs[:0]
    piece_labels = np.empty(len(piece_ids), dtype=np.int64)
    for p, idx in enumerate(groups.values()):
        owners = set(labels[idx].tolist())
        if len(owners) != 1:
            raise ValueError(f"clips of piece {piece_ids[p]!r} carry different labels: {sorted(owners)}")
        piece_labels[p] = labels[idx[0]]
    return piece_ids, mean_probs, piece_labels


def clip_report(probs: np.ndarray, clips: ClipSet, composers: Sequence[str]) -> EvalReport:
    """Clip-wise report from precomputed probabilities; argmax ties go to the lowest class."""
    return score(
        np.argmax(probs, axis=1),
        clips.labels,
        composers,
        GRANULARITY_CLIP,
        clip_count=len(clips),
        piece_count=len(set(clips.source_ids)),
    )


def piece_report(
    probs: np.ndarray, clips: ClipSet, composers: Sequence[str], expected_pieces: Optional[Sequence[str]] = None
) -> EvalReport:
    """
    Piece-wise report: the prediction of a piece is the argmax of its mean clip probabilities.

    Raises
    ------
    ValueError
        If a piece of ``expected_pieces`` has no clips.
    """
    if expected_pieces is not None:
        present = set(clips.source_ids)
        empty = [sid for sid in expected_pieces if sid not in present]
        if empty:
            raise ValueError(f"pieces without clips: {', '.join(empty)}")
    piece_ids, mean_probs, piece_labels = aggregate_pieces(probs, clips.labels, clips.source_ids)
    return score(
        np.argmax(mean_probs, axis=1) if len(piece_ids) else np.zeros(0, dtype=np.int64),
        piece_labels,
        composers,
        GRANULARITY_PIECE,
        clip_count=len(clips),
        piece_count=len(piece_ids),
    )


def _probabilities(model: Model, clips: ClipSet, composers: Sequence[str], batch_size: int) -> np.ndarray:
    if len(composers) != model.config.num_classes:
        raise ValueError(f"{len(composers)} composer names for a {model.config.num_classes}-class model")
    check_labels(clips.labels, model.config.num_classes)
    return model.predict_proba(clips.features, batch_size=batch_size)


def evaluate_clips(model: Model, clips: ClipSet, composers: Sequence[str], batch_size: int = 16) -> EvalReport:
    """
    Clip-wise accuracy of a frozen model (dropout off, batch norm in eval mode).

    Parameters
    ----------
    model : Model
        Trained model.
    clips : ClipSet
        Clips with labels and source ids.
    composers : sequence of str
        Class names by label.
    batch_size : int, optional
        Inference batch size.

    Returns
    -------
    EvalReport
    """
    return clip_report(_probabilities(model, clips, composers, batch_size), clips, composers)


def evaluate_pieces(
    model: Model,
    clips: ClipSet,
    composers: Sequence[str],
    batch_size: int = 16,
    expected_pieces: Optional[Sequence[str]] = None,
) -> EvalReport:
    """Piece-wise accuracy by averaging clip probabilities over each piece."""
    probs = _probabilities(model, clips, composers, batch_size)
    return piece_report(probs, clips, composers, expected_pieces)
