"""
Bidirectional GRU with backpropagation through time.

Gate equations (one direction, ``x_t`` of width D, state of width H)::

    z_t = sigmoid(x_t W_z + h_{t-1} U_z + b_z)
    r_t = sigmoid(x_t W_r + h_{t-1} U_r + b_r)
    c_t = tanh(x_t W_h + (r_t * h_{t-1}) U_h + b_h)
    h_t = (1 - z_t) * h_{t-1} + z_t * c_t,    h_0 = 0
"""

from typing import Dict

import numpy as np

from composer_id.nn.layers import Layer, glorot_uniform
from composer_id.nn.tensor import Tensor

GATES = ("z", "r", "h")


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def orthogonal(rng: np.random.Generator, size: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((size, size)))
    return (q * np.sign(np.diag(r))).astype(np.float32)


class GRUDirection(Layer):
    """One GRU direction over ``B x T x D`` inputs, returning all states ``B x T x H``."""

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator) -> None:
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.params: Dict[str, Tensor] = {}
        for gate in GATES:
            self.params[f"W_{gate}"] = Tensor(glorot_uniform(rng, (input_size, hidden_size), input_size, hidden_size))
        for gate in GATES:
            self.params[f"U_{gate}"] = Tensor(orthogonal(rng, hidden_size))
        for gate in GATES:
            self.params[f"b_{gate}"] = Tensor(np.zeros(hidden_size, dtype=np.float32))
        self._cache = None

    def parameters(self) -> Dict[str, Tensor]:
        return dict(self.params)

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 3 or x.shape[2] != self.input_size:
            raise ValueError(f"gru expects B x T x {self.input_size} input, got {x.shape}")
        p = {name: t.data for name, t in self.params.items()}
        batch, steps, _ = x.shape
        dtype = np.result_type(x, p["W_z"])
        x_z = x @ p["W_z"] + p["b_z"]
        x_r = x @ p["W_r"] + p["b_r"]
        x_h = x @ p["W_h"] + p["b_h"]

        h = np.zeros((batch, self.hidden_size), dtype=dtype)
        states = np.empty((batch, steps, self.hidden_size), dtype=dtype)
        cache = []
        for t in range(steps):
            z = sigmoid(x_z[:, t] + h @ p["U_z"])
            r = sigmoid(x_r[:, t] + h @ p["U_r"])
            c = np.tanh(x_h[:, t] + (r * h) @ p["U_h"])
            cache.append((z, r, c, h))
            h = (1.0 - z) * h + z * c
            states[:, t] = h
        self._cache = (x, cache)
        return states

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x, cache = self._cache
        p = {name: t.data for name, t in self.params.items()}
        batch, steps, _ = x.shape
        grads = {name: np.zeros_like(value) for name, value in p.items()}
        da = {gate: np.empty((batch, steps, self.hidden_size), dtype=grad.dtype) for gate in GATES}

        dh_next = np.zeros((batch, self.hidden_size), dtype=grad.dtype)
        for t in reversed(range(steps)):
            z, r, c, h_prev = cache[t]
            dh = grad[:, t] + dh_next
            dz = dh * (c - h_prev)
            dc = dh * z
            dh_prev = dh * (1.0 - z)

            da_h = dc * (1.0 - c * c)
            d_rh = da_h @ p["U_h"].T
            grads["U_h"] += (r * h_prev).T @ da_h
            dr = d_rh * h_prev
            dh_prev += d_rh * r

            da_z = dz * z * (1.0 - z)
            da_r = dr * r * (1.0 - r)
            grads["U_z"] += h_prev.T @ da_z
            grads["U_r"] += h_prev.T @ da_r
            dh_prev += da_z @ p["U_z"].T + da_r @ p["U_r"].T

            da["z"][:, t] = da_z
            da["r"][:, t] = da_r
            da["h"][:, t] = da_h
            dh_next = dh_prev

        flat_x = x.reshape(-1, self.input_size)
        dx = np.zeros_like(x, dtype=grad.dtype)
        for gate in GATES:
            flat = da[gate].reshape(-1, self.hidden_size)
            grads[f"W_{gate}"] = flat_x.T @ flat
            grads[f"b_{gate}"] = flat.sum(axis=0)
            dx += da[gate] @ p[f"W_{gate}"].T
        for name, tensor in self.params.items():
            tensor.grad = grads[name].astype(tensor.data.dtype, copy=False)
        return dx


class BiGRU(Layer):
    """
    Forward and time-reversed GRU directions, outputs concatenated to ``B x T x 2H``.
    """

    def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator) -> None:
        self.hidden_size = hidden_size
        self.fwd = GRUDirection(input_size, hidden_size, rng)
        self.bwd = GRUDirection(input_size, hidden_size, rng)

    def parameters(self) -> Dict[str, Tensor]:
        params = {f"fwd.{name}": t for name, t in self.fwd.parameters().items()}
        params.update({f"bwd.{name}": t for name, t in self.bwd.parameters().items()})
        return params

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        out_f = self.fwd.forward(x, training)
        out_b = self.bwd.forward(x[:, ::-1], training)[:, ::-1]
        return np.concatenate([out_f, out_b], axis=2)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        hidden = self.hidden_size
        dx_f = self.fwd.backward(grad[:, :, :hidden])
        dx_b = self.bwd.backward(grad[:, ::-1, hidden:])[:, ::-1]
        return dx_f + dx_b
