"""Shared fixtures and independent oracles for the test suite."""

import itertools
import math
import random

import pytest

from gnas import Architecture, LayerSpec, SearchBounds


def oracle_spearman(xs, ys):
    """Brute-force oracle: explicit average-rank assignment, then Pearson.

    Written against the definition and kept independent of gnas.ranking:
    ranks are assigned by scanning sorted copies, Pearson is computed from
    raw sums.
    """
    def explicit_ranks(values):
        ordered = sorted(values)
        ranks = []
        for v in values:
            first = ordered.index(v) + 1
            count = ordered.count(v)
            ranks.append(first + (count - 1) / 2.0)
        return ranks

    ra, rb = explicit_ranks(list(xs)), explicit_ranks(list(ys))
    n = len(ra)
    ma, mb = sum(ra) / n, sum(rb) / n
    num = sum((a - ma) * (b - mb) for a, b in zip(ra, rb))
    da = math.sqrt(sum((a - ma) ** 2 for a in ra))
    db = math.sqrt(sum((b - mb) ** 2 for b in rb))
    return num / (da * db)


def enumerate_space(bounds: SearchBounds, input_resolution=32, num_classes=10):
    """Every architecture in a (small) bounded space, by brute force."""
    archs = []
    for depth in range(bounds.d_min, bounds.d_max + 1):
        for stem in bounds.width_grid():
            choices = list(itertools.product(bounds.ops, bounds.kernels))
            for combo in itertools.product(choices, repeat=depth):
                layers = tuple(LayerSpec(op=o, kernel=k) for o, k in combo)
                archs.append(Architecture(
                    depth=depth, stem_width=stem, layers=layers,
                    input_resolution=input_resolution, num_classes=num_classes,
                ))
    return archs


def uniform_layers(depth, op="sep", kernel=3):
    return (LayerSpec(op=op, kernel=kernel),) * depth


@pytest.fixture
def tiny_bounds():
    """16-candidate space: one depth, one width, 2 ops x 2 kernels, depth 2."""
    return SearchBounds(d_min=2, d_max=2, w_min=8, w_max=8, w_res=2, e_min=1)


@pytest.fixture
def desk_bounds():
    """Cohort bounds whose parameter counts sit at the surrogate's design scale."""
    return SearchBounds(d_min=5, d_max=40, w_min=8, w_max=32, w_res=2, e_min=1)


def random_vector_pair(rng: random.Random, max_len=50):
    """Random same-length vectors, frequently with ties."""
    n = rng.randrange(2, max_len + 1)
    if rng.random() < 0.5:
        pool = list(range(rng.randrange(2, 8)))
        xs = [float(rng.choice(pool)) for _ in range(n)]
        ys = [float(rng.choice(pool)) for _ in range(n)]
    else:
        xs = [rng.uniform(-100, 100) for _ in range(n)]
        ys = [rng.uniform(-100, 100) for _ in range(n)]
    # correlation needs variation on both sides
    if len(set(xs)) < 2:
        xs[0] += 1.0
    if len(set(ys)) < 2:
        ys[0] += 1.0
    return xs, ys
