"""Trainer worker: materializes architecture JSON as a real convolutional
network, trains it for a requested number of epochs, and reports validation
accuracy over the newline-delimited JSON wire protocol."""

from .net import build_network, downsample_positions, layer_widths
from .worker import WorkerConfig, serve

__version__ = "0.1.0"
