"""Search space model: candidate architectures, width schedules, parameter
counting, space-size arithmetic, and random sampling.

A candidate is fully described by (depth, stem width, per-layer op/kernel).
Everything else (per-layer widths, stride-2 placement) is derived
deterministically, so two candidates with equal descriptions are the same
network everywhere in the engine.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

from .errors import InvalidBounds, ScheduleError

# Operation kinds. Canonical JSON uses the same short names.
SEP = "sep"  # depthwise separable convolution
CONV = "conv"  # plain convolution

OPS = (SEP, CONV)
DEFAULT_KERNELS = (3, 5)


@dataclass(frozen=True)
class LayerSpec:
    """One layer's searched choices: operation kind and square kernel size."""

    op: str
    kernel: int

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown op {self.op!r}, expected one of {OPS}")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError(f"kernel must be a positive odd integer, got {self.kernel}")


@dataclass(frozen=True)
class Architecture:
    """A full candidate: layer count, stem channels, and per-layer specs.

    ``stem_width`` is the channel count of layer 1; later widths follow the
    derived doubling schedule (see :func:`derive_schedule`).
    """

    depth: int
    stem_width: int
    layers: tuple[LayerSpec, ...]
    input_resolution: int = 32
    num_classes: int = 10

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.stem_width < 1:
            raise ValueError(f"stem_width must be >= 1, got {self.stem_width}")
        if len(self.layers) != self.depth:
            raise ValueError(f"got {len(self.layers)} layers for depth {self.depth}")
        if self.input_resolution < 1:
            raise ValueError("input_resolution must be >= 1")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")


@dataclass(frozen=True)
class WidthSchedule:
    """Derived per-layer channel counts and 1-indexed stride-2 positions."""

    per_layer_width: tuple[int, ...]
    downsample_at: tuple[int, ...]


@dataclass(frozen=True)
class SearchBounds:
    """The search-space definition: ranges for depth, stem width, training
    budget floor, and the allowed operation/kernel sets."""

    d_min: int = 5
    d_max: int = 100
    w_min: int = 16
    w_max: int = 128
    w_res: int = 2
    e_min: int = 10
    ops: tuple[str, ...] = OPS
    kernels: tuple[int, ...] = DEFAULT_KERNELS
    num_stages: int = 3

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "kernels", tuple(int(k) for k in self.kernels))
        if not (1 <= self.d_min <= self.d_max):
            raise InvalidBounds(f"need 1 <= d_min <= d_max, got [{self.d_min}, {self.d_max}]")
        if not (1 <= self.w_min <= self.w_max):
            raise InvalidBounds(f"need 1 <= w_min <= w_max, got [{self.w_min}, {self.w_max}]")
        if self.w_res < 1:
            raise InvalidBounds(f"w_res must be >= 1, got {self.w_res}")
        if self.e_min < 1:
            raise InvalidBounds(f"e_min must be >= 1, got {self.e_min}")
        if not self.ops or not self.kernels:
            raise InvalidBounds("ops and kernels must be non-empty")
        for op in self.ops:
            if op not in OPS:
                raise InvalidBounds(f"unknown op {op!r}")
        if self.num_stages < 0:
            raise InvalidBounds("num_stages must be >= 0")

    def width_grid(self) -> list[int]:
        """All stem widths reachable from w_min in steps of w_res, clipped to w_max."""
        return list(range(self.w_min, self.w_max + 1, self.w_res))


def derive_schedule(arch: Architecture, num_stages: int = 3) -> WidthSchedule:
    """Place stride-2 layers evenly and double channels at each one.

    Position i sits at floor(i * depth / (num_stages + 1)). Positions that
    land before layer 2 are dropped: layer 1 always carries stem_width, so a
    doubling there would contradict the stem definition. Duplicates collapse,
    so shallow candidates get fewer than ``num_stages`` doublings.
    """
    if num_stages < 0:
        raise ValueError("num_stages must be >= 0")
    if 2 ** num_stages > arch.input_resolution:
        raise ScheduleError(
            f"{num_stages} downsampling stages need resolution >= {2 ** num_stages}, "
            f"got {arch.input_resolution}"
        )
    positions = sorted(
        {
            (i * arch.depth) // (num_stages + 1)
            for i in range(1, num_stages + 1)
        }
    )
    positions = [p for p in positions if 2 <= p <= arch.depth]
    widths = []
    w = arch.stem_width
    at = set(positions)
    for layer in range(1, arch.depth + 1):
        if layer in at:
            w *= 2
        widths.append(w)
    return WidthSchedule(per_layer_width=tuple(widths), downsample_at=tuple(positions))


def count_params(arch: Architecture, in_channels: int = 3, num_stages: int = 3) -> int:
    """Exact learnable-parameter count for a candidate.

    Convolutions carry no bias (batch norm follows each block and contributes
    its affine pair 2*C_out). A separable layer is depthwise (C_in*k*k) plus
    pointwise (C_in*C_out). The head is global pooling followed by a single
    linear classifier.
    """
    schedule = derive_schedule(arch, num_stages)
    total = 0
    c_in = in_channels
    for spec, c_out in zip(arch.layers, schedule.per_layer_width):
        k2 = spec.kernel * spec.kernel
        if spec.op == CONV:
            total += c_in * c_out * k2 + 2 * c_out
        else:
            total += c_in * k2 + c_in * c_out + 2 * c_out
        c_in = c_out
    total += c_in * arch.num_classes + arch.num_classes
    return total


def space_size(bounds: SearchBounds, d_f: int) -> int:
    """Upper bound on the number of candidate architectures, exactly.

    (|ops| * |kernels|) ** d_f * |depth range| * |width grid|, evaluated in
    arbitrary-precision integers; no floating point anywhere.
    """
    if d_f < 1:
        raise ValueError(f"d_f must be >= 1, got {d_f}")
    depth_range = bounds.d_max - bounds.d_min + 1
    width_grid = (bounds.w_max - bounds.w_min) // bounds.w_res + 1
    return (len(bounds.ops) * len(bounds.kernels)) ** d_f * depth_range * width_grid


def sample_random(
    bounds: SearchBounds,
    seed: int,
    input_resolution: int = 32,
    num_classes: int = 10,
) -> Architecture:
    """Draw one architecture uniformly from the bounded space.

    Draw order (depth, stem width, then each layer's op and kernel) is part
    of the contract: a given seed always yields the same candidate.
    """
    rng = random.Random(seed)
    depth = rng.randrange(bounds.d_min, bounds.d_max + 1)
    grid = bounds.width_grid()
    stem = grid[rng.randrange(len(grid))]
    layers = tuple(
        LayerSpec(op=bounds.ops[rng.randrange(len(bounds.ops))],
                  kernel=bounds.kernels[rng.randrange(len(bounds.kernels))])
        for _ in range(depth)
    )
    return Architecture(
        depth=depth,
        stem_width=stem,
        layers=layers,
        input_resolution=input_resolution,
        num_classes=num_classes,
    )


def to_dict(arch: Architecture) -> dict:
    """Canonical JSON object form (fixed field order)."""
    return {
        "depth": arch.depth,
        "stem_width": arch.stem_width,
        "input_resolution": arch.input_resolution,
        "num_classes": arch.num_classes,
        "layers": [{"op": l.op, "kernel": l.kernel} for l in arch.layers],
    }


def canonical_json(arch: Architecture) -> str:
    """Canonical serialization: fixed field order, no whitespace. Hash input."""
    return json.dumps(to_dict(arch), separators=(",", ":"))


def from_dict(obj: dict) -> Architecture:
    layers = tuple(LayerSpec(op=l["op"], kernel=int(l["kernel"])) for l in obj["layers"])
    return Architecture(
        depth=int(obj["depth"]),
        stem_width=int(obj["stem_width"]),
        layers=layers,
        input_resolution=int(obj["input_resolution"]),
        num_classes=int(obj["num_classes"]),
    )


def parse_architecture(text: str) -> Architecture:
    return from_dict(json.loads(text))


def arch_hash(arch: Architecture) -> int:
    """Stable 64-bit structural identifier: leading bytes of the SHA-256 of
    the canonical serialization. Platform- and run-independent."""
    digest = hashlib.sha256(canonical_json(arch).encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")
