from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass
class Tensor:
    """
    A numeric array with an optional gradient slot of the same shape.

    Parameters and batch-norm statistics are stored as ``Tensor``; layers
    assign ``grad`` during ``backward``.
    """

    data: np.ndarray
    grad: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data)
        if self.grad is not None and self.grad.shape != self.data.shape:
            raise ValueError(f"grad shape {self.grad.shape} does not match data shape {self.data.shape}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    def astype(self, dtype) -> None:
        self.data = self.data.astype(dtype)
        if self.grad is not None:
            self.grad = self.grad.astype(dtype)
