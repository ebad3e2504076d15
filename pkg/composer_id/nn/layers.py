"""
Differentiable layers with hand-written backward passes.

Every layer caches what its backward pass needs during ``forward`` and
assigns parameter gradients in ``backward``. One ``backward`` call follows
each ``forward`` call. Activations use the ``B x C x H x W`` layout, with
H the time axis and W the pitch (or mel) axis.
"""

from abc import ABC, abstractmethod
from typing import Dict

import numpy as np

from composer_id.nn.tensor import Tensor


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(np.float32)


class Layer(ABC):
    @abstractmethod
    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        pass

    @abstractmethod
    def backward(self, grad: np.ndarray) -> np.ndarray:
        """
        Propagate the gradient of the loss w.r.t. the output.

        Returns the gradient w.r.t. the input and stores parameter
        gradients on the layer's tensors.
        """
        pass

    def parameters(self) -> Dict[str, Tensor]:
        return {}

    def buffers(self) -> Dict[str, Tensor]:
        return {}

    def astype(self, dtype) -> None:
        for tensor in (*self.parameters().values(), *self.buffers().values()):
            tensor.astype(dtype)


class Conv2d(Layer):
    """3x3 convolution (cross-correlation), stride 1, zero padding 1."""

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator) -> None:
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.weight = Tensor(glorot_uniform(rng, (out_channels, in_channels, 3, 3), in_channels * 9, out_channels * 9))
        self.bias = Tensor(np.zeros(out_channels, dtype=np.float32))
        self._padded = None

    def parameters(self) -> Dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ValueError(f"conv2d expects B x {self.in_channels} x H x W input, got {x.shape}")
        batch, _, height, width = x.shape
        w = self.weight.data
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        out = np.zeros((batch, height, width, self.out_channels), dtype=np.result_type(x, w))
        for dy in range(3):
            for dx in range(3):
                out += np.tensordot(xp[:, :, dy : dy + height, dx : dx + width], w[:, :, dy, dx], axes=([1], [1]))
        self._padded = xp
        return out.transpose(0, 3, 1, 2) + self.bias.data[None, :, None, None]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        xp = self._padded
        height, width = grad.shape[2], grad.shape[3]
        w = self.weight.data
        dw = np.zeros_like(w)
        dxp = np.zeros_like(xp)
        for dy in range(3):
            for dx in range(3):
                window = xp[:, :, dy : dy + height, dx : dx + width]
                dw[:, :, dy, dx] = np.tensordot(grad, window, axes=([0, 2, 3], [0, 2, 3]))
                dxp[:, :, dy : dy + height, dx : dx + width] += np.tensordot(
                    grad, w[:, :, dy, dx], axes=([1], [0])
                ).transpose(0, 3, 1, 2)
        self.weight.grad = dw
        self.bias.grad = grad.sum(axis=(0, 2, 3)).astype(self.bias.data.dtype)
        return dxp[:, :, 1:-1, 1:-1]


class ReLU(Layer):
    def __init__(self) -> None:
        self._mask = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        # NaN passes through
        self._mask = ~(x <= 0)
        return np.where(self._mask, x, 0).astype(x.dtype, copy=False)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return np.where(self._mask, grad, 0).astype(grad.dtype, copy=False)


class BatchNorm2d(Layer):
    """
    Batch normalization over (B, H, W) per channel.

    Training mode normalizes with batch statistics and updates the running
    statistics as ``running = momentum * running + (1 - momentum) * batch``;
    eval mode uses the running statistics (initially mean 0, variance 1).
    """

    def __init__(self, channels: int, momentum: float = 0.9, eps: float = 1e-5) -> None:
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = Tensor(np.ones(channels, dtype=np.float32))
        self.beta = Tensor(np.zeros(channels, dtype=np.float32))
        self.running_mean = Tensor(np.zeros(channels, dtype=np.float32))
        self.running_var = Tensor(np.ones(channels, dtype=np.float32))
        self._cache = None

    def parameters(self) -> Dict[str, Tensor]:
        return {"gamma": self.gamma, "beta": self.beta}

    def buffers(self) -> Dict[str, Tensor]:
        return {"running_mean": self.running_mean, "running_var": self.running_var}

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ValueError(f"batch_norm2d expects B x {self.channels} x H x W input, got {x.shape}")
        if training:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            rm, rv = self.running_mean, self.running_var
            rm.data = (self.momentum * rm.data + (1 - self.momentum) * mean).astype(rm.data.dtype)
            rv.data = (self.momentum * rv.data + (1 - self.momentum) * var).astype(rv.data.dtype)
        else:
            mean = self.running_mean.data
            var = self.running_var.data
        inv_std = 1.0 / np.sqrt(var + self.eps)
        x_hat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
        self._cache = (x_hat, inv_std, training)
        out = x_hat * self.gamma.data[None, :, None, None] + self.beta.data[None, :, None, None]
        return out.astype(np.result_type(x, self.gamma.data), copy=False)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x_hat, inv_std, training = self._cache
        self.gamma.grad = (grad * x_hat).sum(axis=(0, 2, 3)).astype(self.gamma.data.dtype)
        self.beta.grad = grad.sum(axis=(0, 2, 3)).astype(self.beta.data.dtype)
        dx_hat = grad * self.gamma.data[None, :, None, None]
        if not training:
            return dx_hat * inv_std[None, :, None, None]
        count = grad.shape[0] * grad.shape[2] * grad.shape[3]
        sum_dx_hat = dx_hat.sum(axis=(0, 2, 3), keepdims=True)
        sum_dx_hat_xhat = (dx_hat * x_hat).sum(axis=(0, 2, 3), keepdims=True)
        return inv_std[None, :, None, None] / count * (count * dx_hat - sum_dx_hat - x_hat * sum_dx_hat_xhat)


class AvgPool2x2(Layer):
    """2x2 average pooling, stride 2; an odd trailing row or column is dropped."""

    def __init__(self) -> None:
        self._in_shape = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        batch, channels, height, width = x.shape
        if height < 2 or width < 2:
            raise ValueError(f"avg_pool2x2 needs H, W >= 2, got {x.shape}")
        self._in_shape = x.shape
        h2, w2 = height // 2, width // 2
        blocks = x[:, :, : h2 * 2, : w2 * 2].reshape(batch, channels, h2, 2, w2, 2)
        return blocks.mean(axis=(3, 5))

    def backward(self, grad: np.ndarray) -> np.ndarray:
        dx = np.zeros(self._in_shape, dtype=grad.dtype)
        h2, w2 = grad.shape[2], grad.shape[3]
        spread = np.repeat(np.repeat(grad / 4.0, 2, axis=2), 2, axis=3)
        dx[:, :, : h2 * 2, : w2 * 2] = spread
        return dx


class GlobalMaxPool(Layer):
    """Per-channel max over H x W; the gradient goes to the first argmax in row-major order."""

    def __init__(self) -> None:
        self._in_shape = None
        self._argmax = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        batch, channels = x.shape[:2]
        flat = x.reshape(batch, channels, -1)
        self._in_shape = x.shape
        self._argmax = flat.argmax(axis=2)
        return np.take_along_axis(flat, self._argmax[..., None], axis=2)[..., 0]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        batch, channels = self._in_shape[:2]
        dx = np.zeros((batch, channels, int(np.prod(self._in_shape[2:]))), dtype=grad.dtype)
        np.put_along_axis(dx, self._argmax[..., None], grad[..., None], axis=2)
        return dx.reshape(self._in_shape)


class Dropout(Layer):
    """Inverted dropout; identity in eval mode."""

    def __init__(self, rate: float, rng: np.random.Generator) -> None:
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng
        self._mask = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        keep = self.rng.random(x.shape) >= self.rate
        self._mask = (keep / (1.0 - self.rate)).astype(x.dtype)
        return x * self._mask

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return grad
        return grad * self._mask


class Linear(Layer):
    """Affine map ``x @ W + b`` with ``W`` of shape ``D x E``."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator) -> None:
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Tensor(glorot_uniform(rng, (in_features, out_features), in_features, out_features))
        self.bias = Tensor(np.zeros(out_features, dtype=np.float32))
        self._x = None

    def parameters(self) -> Dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ValueError(f"linear expects B x {self.in_features} input, got {x.shape}")
        self._x = x
        return x @ self.weight.data + self.bias.data

    def backward(self, grad: np.ndarray) -> np.ndarray:
        self.weight.grad = (self._x.T @ grad).astype(self.weight.data.dtype, copy=False)
        self.bias.grad = grad.sum(axis=0).astype(self.bias.data.dtype, copy=False)
        return grad @ self.weight.data.T


class FrequencyMean(Layer):
    """Bridge from conv maps to a sequence: ``B x C x T x F`` -> ``B x T x C`` by averaging F."""

    def __init__(self) -> None:
        self._freq = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        self._freq = x.shape[3]
        return x.mean(axis=3).transpose(0, 2, 1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        spread = grad.transpose(0, 2, 1)[..., None] / self._freq
        return np.repeat(spread, self._freq, axis=3)


class TemporalPool(Layer):
    """
    Summarize a bidirectional sequence ``B x T x 2H`` into ``B x 2H``.

    ``mode="max"`` takes the max over time (first argmax gets the gradient);
    ``mode="last"`` takes the final state of each direction, i.e. the last
    step of the forward half and the first step of the backward half.
    """

    def __init__(self, mode: str = "max") -> None:
        if mode not in ("max", "last"):
            raise ValueError(f"unknown temporal pooling mode {mode!r}")
        self.mode = mode
        self._in_shape = None
        self._argmax = None

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        self._in_shape = x.shape
        if self.mode == "max":
            self._argmax = x.argmax(axis=1)
            return np.take_along_axis(x, self._argmax[:, None, :], axis=1)[:, 0, :]
        half = x.shape[2] // 2
        return np.concatenate([x[:, -1, :half], x[:, 0, half:]], axis=1)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        dx = np.zeros(self._in_shape, dtype=grad.dtype)
        if self.mode == "max":
            np.put_along_axis(dx, self._argmax[:, None, :], grad[:, None, :], axis=1)
            return dx
        half = self._in_shape[2] // 2
        dx[:, -1, :half] = grad[:, :half]
        dx[:, 0, half:] = grad[:, half:]
        return dx
