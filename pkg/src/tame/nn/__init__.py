from .adam import AdamState
from .cnn import (
    ConvNetConfig,
    ConvNetParams,
    cnn_backward,
    cnn_features,
    cnn_forward,
    cnn_forward_trace,
    init_convnet,
)
from .losses import PROB_CLAMP, bce_grad, bce_loss
from .params import arrays_of, content_hash, freeze, param_count
from .sdl import SdlConfig, SdlParams, init_sdl, sdl_backward, sdl_forward, sdl_forward_trace
from .shared_bottom import SharedBottomParams, add_head, head_probs, matched_trunk_config, train_task_head
from .train import cnn_head_probs, train_cnn, train_sdl

__all__ = [
    "AdamState",
    "ConvNetConfig",
    "ConvNetParams",
    "cnn_backward",
    "cnn_features",
    "cnn_forward",
    "cnn_forward_trace",
    "init_convnet",
    "PROB_CLAMP",
    "bce_grad",
    "bce_loss",
    "arrays_of",
    "content_hash",
    "freeze",
    "param_count",
    "SdlConfig",
    "SdlParams",
    "init_sdl",
    "sdl_backward",
    "sdl_forward",
    "sdl_forward_trace",
    "SharedBottomParams",
    "add_head",
    "head_probs",
    "matched_trunk_config",
    "train_task_head",
    "cnn_head_probs",
    "train_cnn",
    "train_sdl",
]
