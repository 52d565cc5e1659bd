"""Budgeted training of one candidate: SGD with momentum 0.9, weight decay
3e-4, learning rate 0.025 cosine-annealed to zero over the requested epochs,
batch size 64. No augmentation during search."""

from __future__ import annotations

import time

import numpy as np
import torch
import torch.nn as nn
from torch.utils.data import DataLoader, TensorDataset


def train_and_validate(
    model: nn.Module,
    train_data: tuple[np.ndarray, np.ndarray],
    val_data: tuple[np.ndarray, np.ndarray],
    epochs: int,
    seed: int,
    device: str = "cpu",
    batch_size: int = 64,
    lr: float = 0.025,
    momentum: float = 0.9,
    weight_decay: float = 3e-4,
) -> tuple[float, float]:
    """Returns (validation accuracy percent, wall seconds)."""
    start = time.perf_counter()
    torch.manual_seed(seed)
    model = model.to(device)

    train_images = torch.from_numpy(train_data[0])
    train_labels = torch.from_numpy(train_data[1])
    generator = torch.Generator().manual_seed(seed)
    loader = DataLoader(
        TensorDataset(train_images, train_labels),
        batch_size=batch_size, shuffle=True, generator=generator,
    )
    optimizer = torch.optim.SGD(model.parameters(), lr=lr, momentum=momentum,
                                weight_decay=weight_decay)
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=epochs)
    criterion = nn.CrossEntropyLoss()

    model.train()
    for _ in range(epochs):
        for images, labels in loader:
            images, labels = images.to(device), labels.to(device)
            optimizer.zero_grad()
            loss = criterion(model(images), labels)
            loss.backward()
            optimizer.step()
        scheduler.step()

    model.eval()
    val_images = torch.from_numpy(val_data[0])
    val_labels = torch.from_numpy(val_data[1])
    correct = 0
    with torch.no_grad():
        for i in range(0, len(val_labels), batch_size):
            batch = val_images[i:i + batch_size].to(device)
            predicted = model(batch).argmax(dim=1).cpu()
            correct += int((predicted == val_labels[i:i + batch_size]).sum())
    accuracy = 100.0 * correct / len(val_labels)
    return accuracy, time.perf_counter() - start
