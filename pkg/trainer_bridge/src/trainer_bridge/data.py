"""Deterministic 28x28 grayscale 10-class dataset with an on-disk cache.

Each class is an oriented sinusoidal grating (distinct angle, cycling
frequency) with random phase, position jitter, and additive noise: trivially
separable for a small CNN within an epoch, yet non-degenerate. Generation is
seeded, and arrays are cached as .npz under the directory named by
GNAS_DATA_DIR (default ./gnas_data).
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

NUM_CLASSES = 10
RESOLUTION = 28


def data_dir(override: str | None = None) -> Path:
    if override is not None:
        return Path(override)
    return Path(os.environ.get("GNAS_DATA_DIR", "gnas_data"))


def generate(n_samples: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """(images [n, 1, 28, 28] float32, labels [n] int64), deterministic."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, NUM_CLASSES, size=n_samples)
    ys, xs = np.mgrid[0:RESOLUTION, 0:RESOLUTION].astype(np.float32) / RESOLUTION
    images = np.empty((n_samples, 1, RESOLUTION, RESOLUTION), dtype=np.float32)
    angles = np.pi * np.arange(NUM_CLASSES) / NUM_CLASSES
    freqs = 2.0 + np.arange(NUM_CLASSES) % 3
    for i, label in enumerate(labels):
        theta = angles[label]
        freq = freqs[label]
        phase = rng.uniform(0.0, 2.0 * np.pi)
        axis = xs * np.cos(theta) + ys * np.sin(theta)
        pattern = np.sin(2.0 * np.pi * freq * axis + phase)
        pattern += rng.normal(0.0, 0.3, size=pattern.shape).astype(np.float32)
        images[i, 0] = pattern
    images -= images.mean()
    images /= images.std() + 1e-8
    return images, labels.astype(np.int64)


def load(n_samples: int, seed: int = 0, cache_dir: str | None = None,
         name: str = "synthetic") -> tuple[np.ndarray, np.ndarray]:
    """Cached generation; one .npz per (name, n_samples, seed)."""
    if name != "synthetic":
        raise ValueError(f"unknown dataset {name!r}")
    directory = data_dir(cache_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}_{n_samples}_s{seed}.npz"
    if path.exists():
        loaded = np.load(path)
        return loaded["images"], loaded["labels"]
    images, labels = generate(n_samples, seed)
    np.savez_compressed(path, images=images, labels=labels)
    return images, labels


def train_val_split(images: np.ndarray, labels: np.ndarray,
                    val_fraction: float) -> tuple[tuple[np.ndarray, np.ndarray],
                                                  tuple[np.ndarray, np.ndarray]]:
    """Hold out the trailing fraction; generation order is already random."""
    if not 0.0 < val_fraction < 1.0:
        raise ValueError("val_fraction must be in (0, 1)")
    n_val = max(1, int(round(len(labels) * val_fraction)))
    split = len(labels) - n_val
    return (images[:split], labels[:split]), (images[split:], labels[split:])
