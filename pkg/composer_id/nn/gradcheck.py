"""
Finite-difference verification of the hand-written backward passes.

Checks run in float64. The scalar checked is ``sum(forward(x) * R)`` for a
fixed random projection ``R``, so the analytic gradient is ``backward(R)``.
"""

import logging
from typing import Callable, Dict

import numpy as np

from composer_id.nn.layers import Layer
from composer_id.nn.losses import softmax_crossentropy

logger = logging.getLogger("composer_id.gradcheck")


def relative_error(analytic: float, numeric: float, floor: float) -> float:
    """``|a - n| / max(|a|, |n|, floor)``; gradients below ``floor`` compare absolutely."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def _compare_gradients(
    targets: Dict[str, np.ndarray],
    analytic: Dict[str, np.ndarray],
    objective: Callable[[], float],
    eps: float,
    n_coords: int,
    rng: np.random.Generator,
    floor: float,
) -> float:
    worst = 0.0
    for name, array in targets.items():
        if array.size == 0:
            continue
        coords = rng.choice(array.size, size=min(n_coords, array.size), replace=False)
        flat = array.reshape(-1)
        for i in coords:
            original = flat[i]
            flat[i] = original + eps
            f_plus = objective()
            flat[i] = original - eps
            f_minus = objective()
            flat[i] = original
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = float(analytic[name].reshape(-1)[i])
            if not (np.isfinite(numeric) and np.isfinite(a)):
                raise ValueError(f"non-finite gradient for {name}[{i}]: analytic={a}, numeric={numeric}")
            err = relative_error(a, numeric, floor)
            if err > worst:
                worst = err
                logger.debug("gradcheck %s[%d]: analytic=%.10g numeric=%.10g err=%.3g", name, i, a, numeric, err)
    return worst


def gradient_check(
    layer: Layer,
    x: np.ndarray,
    eps: float = 1e-3,
    n_coords: int = 100,
    seed: int = 0,
    training: bool = False,
    floor: float = 1e-3,
) -> float:
    """
    Compare analytic and central-difference gradients of a layer or model.

    The layer is converted to float64 in place. ``training=False`` (the
    default) disables dropout and puts batch norm in eval mode; pass
    ``training=True`` only for layers without randomness.

    Parameters
    ----------
    layer : Layer
        Layer or model under test.
    x : np.ndarray
        Input batch.
    eps : float, optional
        Finite-difference step, by default 1e-3.
    n_coords : int, optional
        Coordinates sampled per tensor (input and every parameter).
    seed : int, optional
        Seed for the projection and coordinate sampling.
    training : bool, optional
        Mode passed to ``forward``.
    floor : float, optional
        Denominator floor of the relative error.

    Returns
    -------
    float
        Maximum relative error over the sampled coordinates.
    """
    rng = np.random.default_rng(seed)
    layer.astype(np.float64)
    x = np.array(x, dtype=np.float64)

    out = layer.forward(x, training)
    projection = rng.standard_normal(out.shape)
    dx = layer.backward(projection)

    params = layer.parameters()
    targets = {"input": x, **{name: t.data for name, t in params.items()}}
    analytic = {"input": dx, **{name: np.array(t.grad) for name, t in params.items()}}

    def objective() -> float:
        return float(np.sum(layer.forward(x, training) * projection))

    return _compare_gradients(targets, analytic, objective, eps, n_coords, rng, floor)


def loss_gradient_check(
    logits: np.ndarray,
    labels: np.ndarray,
    eps: float = 1e-3,
    n_coords: int = 100,
    seed: int = 0,
    floor: float = 1e-3,
) -> float:
    """Gradient check of ``softmax_crossentropy`` w.r.t. the logits."""
    rng = np.random.default_rng(seed)
    logits = np.array(logits, dtype=np.float64)
    _, grad = softmax_crossentropy(logits, labels)

    def objective() -> float:
        return softmax_crossentropy(logits, labels)[0]

    return _compare_gradients({"logits": logits}, {"logits": grad}, objective, eps, n_coords, rng, floor)
