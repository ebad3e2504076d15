import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from composer_id.constants import ARCH_CNN, ARCH_CRNN, ARCHITECTURES
from composer_id.nn.layers import (
    AvgPool2x2,
    BatchNorm2d,
    Conv2d,
    Dropout,
    FrequencyMean,
    GlobalMaxPool,
    Layer,
    Linear,
    ReLU,
    TemporalPool,
)
from composer_id.nn.losses import softmax
from composer_id.nn.recurrent import BiGRU
from composer_id.nn.tensor import Tensor

logger = logging.getLogger("composer_id.model")

CONV_LADDER = (64, 64, 128, 128, 256, 256, 512, 512)


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture hyperparameters.

    ``conv_channels`` is the fixed eight-layer ladder; ``channel_divisor``
    divides it for small CPU smoke runs and is 1 for real experiments.
    ``crnn_summary`` picks temporal max pooling or the final GRU states.
    """

    architecture: str = ARCH_CNN
    in_channels: int = 3
    num_classes: int = 10
    conv_channels: Tuple[int, ...] = CONV_LADDER
    gru_hidden: int = 256
    fc_hidden: int = 512
    dropout_conv: float = 0.2
    dropout_fc: float = 0.5
    crnn_summary: str = "max"
    channel_divisor: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}; expected one of {ARCHITECTURES}")
        if self.in_channels < 1:
            raise ValueError(f"in_channels must be >= 1, got {self.in_channels}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if len(self.conv_channels) != 8:
            raise ValueError(f"conv_channels must list 8 layers, got {len(self.conv_channels)}")
        if self.channel_divisor < 1 or any(c % self.channel_divisor for c in self.conv_channels):
            raise ValueError(f"channel_divisor {self.channel_divisor} must divide every conv width")
        if self.crnn_summary not in ("max", "last"):
            raise ValueError(f"crnn_summary must be 'max' or 'last', got {self.crnn_summary!r}")

    @property
    def widths(self) -> List[int]:
        return [c // self.channel_divisor for c in self.conv_channels]


class Model(Layer):
    """
    A chain of named layers ending in class logits.

    CNN: eight ``conv -> relu -> bn`` layers with 2x2 average pooling and
    dropout after every second layer, global max pooling, then
    ``linear -> relu -> dropout -> linear``. CRNN: the same conv stack, a
    frequency average, a biGRU and temporal pooling before the same head.
    """

    def __init__(self, config: ModelConfig, layers: List[Tuple[str, Layer]]) -> None:
        self.config = config
        self.layers = layers

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.config.in_channels:
            raise ValueError(f"model expects B x {self.config.in_channels} x T x K input, got {x.shape}")
        for _, layer in self.layers:
            x = layer.forward(x, training)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for _, layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self) -> Dict[str, Tensor]:
        return {f"{name}.{pname}": t for name, layer in self.layers for pname, t in layer.parameters().items()}

    def buffers(self) -> Dict[str, Tensor]:
        return {f"{name}.{bname}": t for name, layer in self.layers for bname, t in layer.buffers().items()}

    def astype(self, dtype) -> None:
        for _, layer in self.layers:
            layer.astype(dtype)

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Copies of every parameter and buffer, parameters first."""
        state = {name: t.data.copy() for name, t in self.parameters().items()}
        state.update({name: t.data.copy() for name, t in self.buffers().items()})
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        targets = {**self.parameters(), **self.buffers()}
        missing = sorted(set(targets) - set(state))
        if missing:
            raise ValueError(f"state is missing tensors: {', '.join(missing)}")
        for name, tensor in targets.items():
            value = np.asarray(state[name])
            if value.shape != tensor.shape:
                raise ValueError(f"shape mismatch for {name!r}: expected {tensor.shape}, got {value.shape}")
            tensor.data = value.astype(tensor.data.dtype, copy=True)

    def predict_proba(self, x: np.ndarray, batch_size: int = 16) -> np.ndarray:
        """Softmax probabilities in eval mode, ``N x num_classes``."""
        if len(x) == 0:
            return np.zeros((0, self.config.num_classes), dtype=np.float32)
        chunks = [softmax(self.forward(x[i : i + batch_size], training=False)) for i in range(0, len(x), batch_size)]
        return np.concatenate(chunks)

    def conv_output_shape(self, input_shape: Tuple[int, int, int, int]) -> Tuple[int, int, int, int]:
        """Shape of the conv stack output for a ``B x C x T x K`` input, by floor-pool arithmetic."""
        batch, _, height, width = input_shape
        for _ in range(len(self.config.widths) // 2):
            height, width = height // 2, width // 2
        return batch, self.config.widths[-1], height, width


def build_model(config: ModelConfig) -> Model:
    """
    Build a freshly initialized CNN or CRNN.

    Parameters
    ----------
    config : ModelConfig
        Architecture selection and sizes; ``config.seed`` seeds weight
        initialization and the dropout masks.

    Returns
    -------
    Model
    """
    init_rng = np.random.default_rng([config.seed, 0])
    dropout_rng = np.random.default_rng([config.seed, 1])
    layers: List[Tuple[str, Layer]] = []

    prev = config.in_channels
    for i, width in enumerate(config.widths, start=1):
        layers.append((f"conv{i}", Conv2d(prev, width, init_rng)))
        layers.append((f"relu{i}", ReLU()))
        layers.append((f"bn{i}", BatchNorm2d(width)))
        if i % 2 == 0:
            block = i // 2
            layers.append((f"pool{block}", AvgPool2x2()))
            layers.append((f"drop{block}", Dropout(config.dropout_conv, dropout_rng)))
        prev = width

    if config.architecture == ARCH_CRNN:
        layers.append(("freq_mean", FrequencyMean()))
        layers.append(("gru", BiGRU(prev, config.gru_hidden, init_rng)))
        layers.append(("time_pool", TemporalPool(config.crnn_summary)))
        embedding = 2 * config.gru_hidden
    else:
        layers.append(("global_max", GlobalMaxPool()))
        embedding = prev

    layers.append(("fc1", Linear(embedding, config.fc_hidden, init_rng)))
    layers.append(("fc1_relu", ReLU()))
    layers.append(("fc1_drop", Dropout(config.dropout_fc, dropout_rng)))
    layers.append(("fc2", Linear(config.fc_hidden, config.num_classes, init_rng)))

    model = Model(config=config, layers=layers)
    n_params = sum(t.data.size for t in model.parameters().values())
    logger.debug("Built %s with %d parameters", config.architecture, n_params)
    return model
