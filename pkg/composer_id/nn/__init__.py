from composer_id.nn.gradcheck import gradient_check, loss_gradient_check
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
from composer_id.nn.losses import softmax, softmax_crossentropy
from composer_id.nn.model import CONV_LADDER, Model, ModelConfig, build_model
from composer_id.nn.optim import AdamState, adam_step
from composer_id.nn.recurrent import BiGRU, GRUDirection
from composer_id.nn.tensor import Tensor

__all__ = [
    "AdamState",
    "AvgPool2x2",
    "BatchNorm2d",
    "BiGRU",
    "CONV_LADDER",
    "Conv2d",
    "Dropout",
    "FrequencyMean",
    "GRUDirection",
    "GlobalMaxPool",
    "Layer",
    "Linear",
    "Model",
    "ModelConfig",
    "ReLU",
    "TemporalPool",
    "Tensor",
    "adam_step",
    "build_model",
    "gradient_check",
    "loss_gradient_check",
    "softmax",
    "softmax_crossentropy",
]
