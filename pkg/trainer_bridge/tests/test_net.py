"""Network construction parity against the engine's conventions."""

import pytest
import torch

from trainer_bridge.net import build_network, downsample_positions, layer_widths, parameter_count

from gnas import SearchBounds, count_params, derive_schedule, sample_random, to_dict

PARITY_BOUNDS = SearchBounds(d_min=1, d_max=12, w_min=2, w_max=24, w_res=2,
                             e_min=1, kernels=(3, 5, 7))


class TestScheduleParity:
    def test_positions_match_engine(self):
        for seed in range(50):
            arch = sample_random(PARITY_BOUNDS, seed, input_resolution=28)
            schedule = derive_schedule(arch, 3)
            assert downsample_positions(arch.depth, 3) == list(schedule.downsample_at)
            assert layer_widths(arch.depth, arch.stem_width, 3) == \
                list(schedule.per_layer_width)


class TestParameterParity:
    def test_fifty_random_architectures(self):
        for seed in range(50):
            arch = sample_random(PARITY_BOUNDS, seed, input_resolution=28)
            model = build_network(to_dict(arch), in_channels=1)
            assert parameter_count(model) == count_params(arch, in_channels=1)

    def test_rgb_input(self):
        arch = sample_random(PARITY_BOUNDS, 7, input_resolution=32)
        model = build_network(to_dict(arch), in_channels=3)
        assert parameter_count(model) == count_params(arch, in_channels=3)


class TestForward:
    def test_output_shape_and_strides(self):
        arch = sample_random(PARITY_BOUNDS, 3, input_resolution=28)
        model = build_network(to_dict(arch), in_channels=1)
        out = model(torch.zeros(2, 1, 28, 28))
        assert out.shape == (2, 10)

    def test_rejects_bad_arch(self):
        with pytest.raises(ValueError):
            build_network({"depth": 2, "stem_width": 8, "input_resolution": 28,
                           "num_classes": 10, "layers": [{"op": "sep", "kernel": 3}]})
        with pytest.raises(ValueError):
            build_network({"depth": 1, "stem_width": 8, "input_resolution": 4,
                           "num_classes": 10,
                           "layers": [{"op": "sep", "kernel": 3}]}, num_stages=3)
        with pytest.raises(ValueError):
            build_network({"depth": 1, "stem_width": 8, "input_resolution": 28,
                           "num_classes": 10, "layers": [{"op": "pool", "kernel": 3}]})
