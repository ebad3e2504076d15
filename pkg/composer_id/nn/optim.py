from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from composer_id.constants import LEARNING_RATE


@dataclass
class AdamState:
    """
    Adam moments and step counter, keyed by parameter name.
    """

    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    lr: float = LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_step(params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], state: AdamState) -> None:
    """
    Apply one bias-corrected Adam update to ``params`` in place.

    ``m <- b1 m + (1 - b1) g``; ``v <- b2 v + (1 - b2) g^2``;
    ``p <- p - lr * m_hat / (sqrt(v_hat) + eps)``.

    Parameters
    ----------
    params : mapping of str to np.ndarray
        Parameter arrays, updated in place.
    grads : mapping of str to np.ndarray
        Gradients with the same names and shapes.
    state : AdamState
        Moment buffers, created on first use; ``step`` is incremented.
    """
    for name, value in params.items():
        if name not in grads:
            raise ValueError(f"missing gradient for parameter {name!r}")
        if grads[name].shape != value.shape:
            raise ValueError(f"gradient shape {grads[name].shape} != parameter shape {value.shape} for {name!r}")

    state.step += 1
    bias1 = 1.0 - state.beta1**state.step
    bias2 = 1.0 - state.beta2**state.step

    for name, value in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        value -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
