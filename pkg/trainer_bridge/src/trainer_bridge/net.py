"""Build a PyTorch network from the canonical architecture JSON.

The construction mirrors the engine's conventions exactly, so the
framework-reported parameter count matches the engine's arithmetic:
stride-2 layers sit at floor(i * depth / (num_stages + 1)) for
i = 1..num_stages (positions before layer 2 dropped, duplicates collapsed),
channels double at each stride-2 layer, convolutions carry no bias, every
block ends in an affine batch norm, and the head is global average pooling
into a single linear classifier.
"""

from __future__ import annotations

import torch.nn as nn


def downsample_positions(depth: int, num_stages: int = 3) -> list[int]:
    positions = {(i * depth) // (num_stages + 1) for i in range(1, num_stages + 1)}
    return sorted(p for p in positions if 2 <= p <= depth)


def layer_widths(depth: int, stem_width: int, num_stages: int = 3) -> list[int]:
    positions = set(downsample_positions(depth, num_stages))
    widths = []
    width = stem_width
    for layer in range(1, depth + 1):
        if layer in positions:
            width *= 2
        widths.append(width)
    return widths


def _block(op: str, c_in: int, c_out: int, kernel: int, stride: int) -> list[nn.Module]:
    padding = kernel // 2
    if op == "conv":
        layers = [nn.Conv2d(c_in, c_out, kernel, stride=stride, padding=padding, bias=False)]
    elif op == "sep":
        layers = [
            nn.Conv2d(c_in, c_in, kernel, stride=stride, padding=padding,
                      groups=c_in, bias=False),
            nn.Conv2d(c_in, c_out, 1, bias=False),
        ]
    else:
        raise ValueError(f"unknown op {op!r}")
    layers += [nn.BatchNorm2d(c_out), nn.ReLU(inplace=True)]
    return layers


def build_network(arch: dict, in_channels: int = 1, num_stages: int = 3) -> nn.Sequential:
    """Network for one canonical architecture description."""
    depth = int(arch["depth"])
    stem = int(arch["stem_width"])
    specs = arch["layers"]
    if depth < 1 or stem < 1:
        raise ValueError("depth and stem_width must be >= 1")
    if len(specs) != depth:
        raise ValueError(f"got {len(specs)} layers for depth {depth}")
    if 2 ** num_stages > int(arch["input_resolution"]):
        raise ValueError("too many downsampling stages for the input resolution")

    strides = set(downsample_positions(depth, num_stages))
    widths = layer_widths(depth, stem, num_stages)
    modules: list[nn.Module] = []
    c_in = in_channels
    for index, (spec, c_out) in enumerate(zip(specs, widths), start=1):
        stride = 2 if index in strides else 1
        modules += _block(spec["op"], c_in, c_out, int(spec["kernel"]), stride)
        c_in = c_out
    modules += [
        nn.AdaptiveAvgPool2d(1),
        nn.Flatten(),
        nn.Linear(c_in, int(arch["num_classes"])),
    ]
    return nn.Sequential(*modules)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
