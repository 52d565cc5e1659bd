"""Synthetic dataset determinism, caching, and splits."""

import numpy as np
import pytest

from trainer_bridge.data import generate, load, train_val_split


def test_generation_deterministic():
    a_images, a_labels = generate(200, seed=3)
    b_images, b_labels = generate(200, seed=3)
    assert np.array_equal(a_images, b_images)
    assert np.array_equal(a_labels, b_labels)
    c_images, _ = generate(200, seed=4)
    assert not np.array_equal(a_images, c_images)


def test_all_classes_present():
    _, labels = generate(500, seed=0)
    assert set(labels.tolist()) == set(range(10))


def test_cache_roundtrip(tmp_path):
    first_images, first_labels = load(150, seed=1, cache_dir=str(tmp_path))
    assert len(list(tmp_path.glob("*.npz"))) == 1
    again_images, again_labels = load(150, seed=1, cache_dir=str(tmp_path))
    assert np.array_equal(first_images, again_images)
    assert np.array_equal(first_labels, again_labels)


def test_env_var_names_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GNAS_DATA_DIR", str(tmp_path / "from_env"))
    load(64, seed=0)
    assert (tmp_path / "from_env").exists()


def test_split_sizes():
    images, labels = generate(200, seed=0)
    (train_x, train_y), (val_x, val_y) = train_val_split(images, labels, 0.10)
    assert len(val_y) == 20 and len(train_y) == 180
    assert len(train_x) + len(val_x) == 200


def test_split_fraction_validated():
    images, labels = generate(50, seed=0)
    with pytest.raises(ValueError):
        train_val_split(images, labels, 0.0)


def test_unknown_dataset_rejected(tmp_path):
    with pytest.raises(ValueError):
        load(64, seed=0, cache_dir=str(tmp_path), name="cifar10")
