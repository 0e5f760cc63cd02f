import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from steertest.engine import Dense, Model
from steertest.rng import SplitMix64
from steertest.synth import make_dataset, make_frame, make_model


@pytest.fixture
def tiny_dense_model():
    """Dense(2->1, linear) with weights [1, 1] and zero bias."""
    return Model("tiny", [Dense(2, 1, "linear")],
                 [(np.array([[1.0], [1.0]], dtype=np.float32),
                   np.zeros(1, dtype=np.float32))])


@pytest.fixture
def cnn_model():
    return make_model("cnn", seed=0, image_hw=(16, 16), channels=3)


@pytest.fixture
def lstm_model():
    return make_model("lstm", seed=1, image_hw=(16, 16), channels=3)


@pytest.fixture
def zero_model():
    return make_model("zero", seed=0, image_hw=(16, 16), channels=3)


@pytest.fixture
def frame16():
    return make_frame(16, 16, 3, SplitMix64(7))


def random_image(stream: SplitMix64, h=16, w=16, c=3):
    flat = np.array([stream.randint(256) for _ in range(h * w * c)], dtype=np.uint8)
    return flat.reshape(h, w, c)


@pytest.fixture
def dataset_dir(tmp_path, cnn_model):
    return make_dataset(tmp_path / "data", n_frames=8, image_hw=(16, 16),
                        channels=3, seed=0, model=cnn_model)
