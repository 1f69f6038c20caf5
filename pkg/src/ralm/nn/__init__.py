"""Minimal residual CNN for (x, y) regression, written directly on NumPy."""
from .layers import (batchnorm_backward, batchnorm_forward, conv2d_backward, conv2d_forward,
                     conv_output_size, dense_backward, dense_forward, dropout_backward,
                     dropout_forward, mse_loss, relu_backward, relu_forward)
from .model import (ModelState, ResNetConfig, backward, forward, init_model, predict,
                    residual_block_backward, residual_block_forward)

__all__ = [
    "ModelState", "ResNetConfig", "backward", "batchnorm_backward", "batchnorm_forward",
    "conv2d_backward", "conv2d_forward", "conv_output_size", "dense_backward", "dense_forward",
    "dropout_backward", "dropout_forward", "forward", "init_model", "mse_loss", "predict",
    "relu_backward", "relu_forward", "residual_block_backward", "residual_block_forward",
]
