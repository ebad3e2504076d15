from typing import Tuple

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_crossentropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean categorical cross entropy of softmax(logits) against integer labels.

    Parameters
    ----------
    logits : np.ndarray
        ``B x C`` scores.
    labels : np.ndarray
        ``B`` integer labels in ``0..C-1``.

    Returns
    -------
    loss : float
        ``mean(-log softmax(logits)[label])``.
    grad : np.ndarray
        ``(softmax - onehot) / B``, same shape as ``logits``.
    """
    labels = np.asarray(labels)
    batch, n_classes = logits.shape
    if labels.shape != (batch,):
        raise ValueError(f"labels shape {labels.shape} does not match batch {batch}")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must be in 0..{n_classes - 1}, got range {labels.min()}..{labels.max()}")

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    rows = np.arange(batch)
    loss = float(-log_probs[rows, labels].mean())

    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    return loss, grad / batch
