import numpy as np
import pytest

from qnngp import ModelHandle, brickwall, calibrate_normalization, product


@pytest.fixture
def single_qubit_model():
    """m=1, G=X, O=Z with the normalization pinned to 1 (closed-form regime)."""
    arch = product(1, 1, input_dim=1, encoding_seed=0)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)), n_m=1.0)
    return model


@pytest.fixture
def small_brickwall_model():
    arch = brickwall(3, 2, input_dim=2, encoding_seed=5)
    model = ModelHandle(
        arch=arch, feature_space=np.array([[0.2, -0.3], [1.0, 0.5], [-0.7, 0.1]])
    )
    calibrate_normalization(model, 300, 42)
    return model
