"""Model output, calibration, and gradient checks against analytic oracles."""

import numpy as np
import pytest

from qnngp.circuit import brickwall, product
from qnngp.lightcone import build_lightcones
from qnngp.model import (
    CalibrationError,
    Dataset,
    ModelHandle,
    UnknownInputError,
    calibrate_normalization,
    check_centering,
    eval_components,
    eval_f,
    grad_components,
    grad_f,
    sample_init,
    sample_init_batch,
)

RNG = np.random.default_rng(99)


def test_single_qubit_closed_form(single_qubit_model):
    for theta in RNG.uniform(0, np.pi, 6):
        assert eval_f(single_qubit_model, np.array([theta]), 0) == pytest.approx(
            np.cos(2 * theta), abs=1e-12
        )


def test_identity_circuit_value():
    arch = brickwall(3, 2, input_dim=1, encoding_seed=4)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)), n_m=2.0)
    assert eval_f(model, np.zeros(arch.n_params), 0) == pytest.approx(3.0 / 2.0, abs=1e-12)


def test_two_qubit_product_value():
    arch = product(2, 1, input_dim=1)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)), n_m=1.5)
    theta = RNG.uniform(0, np.pi, 2)
    expected = (np.cos(2 * theta[0]) + np.cos(2 * theta[1])) / 1.5
    assert eval_f(model, theta, 0) == pytest.approx(expected, abs=1e-12)


def test_output_magnitude_cap(small_brickwall_model):
    model = small_brickwall_model
    cap = model.arch.m / model.n_m
    for _ in range(10):
        theta = sample_init(model, int(RNG.integers(1 << 30)))
        x = int(RNG.integers(model.n_inputs))
        assert abs(eval_f(model, theta, x)) <= cap + 1e-12


def test_unknown_input_rejected(small_brickwall_model):
    with pytest.raises(UnknownInputError):
        eval_f(small_brickwall_model, np.zeros(small_brickwall_model.arch.n_params), [9.0, 9.0])
    with pytest.raises(UnknownInputError):
        eval_f(small_brickwall_model, np.zeros(small_brickwall_model.arch.n_params), 17)


def test_gradient_single_qubit_identity(single_qubit_model):
    for theta in RNG.uniform(0, np.pi, 6):
        grad = grad_f(single_qubit_model, np.array([theta]), 0)
        assert grad[0] == pytest.approx(-2 * np.sin(2 * theta), abs=1e-12)
    assert grad_f(single_qubit_model, np.zeros(1), 0)[0] == pytest.approx(0.0, abs=1e-14)


def test_gradient_finite_difference_and_adjoint(small_brickwall_model):
    model = small_brickwall_model
    h = 1e-5
    for _ in range(5):
        theta = sample_init(model, int(RNG.integers(1 << 30)))
        x = int(RNG.integers(model.n_inputs))
        shift_grad = grad_f(model, theta, x)
        adj_grad = grad_f(model, theta, x, method="adjoint")
        assert np.max(np.abs(shift_grad - adj_grad)) <= 1e-10
        fd = np.empty_like(shift_grad)
        for i in range(len(theta)):
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            fd[i] = (eval_f(model, up, x) - eval_f(model, down, x)) / (2 * h)
        rel = np.max(np.abs(shift_grad - fd)) / max(np.max(np.abs(fd)), 1e-6)
        assert rel <= 1e-5
    with pytest.raises(ValueError):
        grad_f(model, sample_init(model, 0), 0, method="nope")


def test_gradient_locality(small_brickwall_model):
    model = small_brickwall_model
    table = build_lightcones(model.arch)
    theta = sample_init(model, 5)
    for x in range(model.n_inputs):
        jac = grad_components(model, theta, x)
        for i in range(model.arch.n_params):
            for k in range(model.arch.m):
                if k not in table.future[i]:
                    assert abs(jac[i, k]) <= 1e-12


def test_gradient_uniform_bound(small_brickwall_model):
    model = small_brickwall_model
    table = build_lightcones(model.arch)
    cap = 2.0 * table.max_future / model.n_m
    for _ in range(10):
        theta = sample_init(model, int(RNG.integers(1 << 30)))
        grad = grad_f(model, theta, int(RNG.integers(model.n_inputs)), method="adjoint")
        assert np.max(np.abs(grad)) <= cap + 1e-12


def test_sample_init_statistics():
    arch = product(2, 1, input_dim=1)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)))
    assert np.array_equal(sample_init(model, 11), sample_init(model, 11))
    draws = sample_init_batch(model, 50_000, 3)
    assert draws.min() >= 0.0 and draws.max() <= np.pi
    sigma = np.pi / np.sqrt(12.0)
    tol = 3.0 * sigma / np.sqrt(draws.size)
    assert abs(draws.mean() - np.pi / 2.0) <= tol <= 0.01


def test_calibration_single_qubit():
    arch = product(1, 1, input_dim=1)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)))
    n_m = calibrate_normalization(model, 2000, 8)
    stderr = model.calibration["second_moment_stderr"][0]
    assert abs(n_m**2 - 0.5) <= 3.0 * stderr


def test_calibration_product_scaling():
    m = 4
    arch = product(m, 1, input_dim=1)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)))
    n_m = calibrate_normalization(model, 3000, 9)
    stderr = model.calibration["second_moment_stderr"][0]
    assert abs(n_m**2 - m / 2.0) <= 3.0 * stderr


def test_calibration_inequality_bound(small_brickwall_model):
    model = small_brickwall_model
    table = build_lightcones(model.arch)
    n_samples = model.calibration["n_samples"]
    cap = np.sqrt(model.arch.m * table.max_future * table.max_past)
    assert model.n_m <= cap * (1.0 + 3.0 / np.sqrt(n_samples))


def test_calibration_requires_samples_and_nonzero_function():
    arch = product(1, 1, input_dim=1)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)))
    with pytest.raises(ValueError):
        calibrate_normalization(model, 10, 0)
    # Z-generated rotations on |0> never move the X observable off zero
    dead = product(1, 1, generator_axes="z", observable_axes=("x",), input_dim=1)
    dead_model = ModelHandle(arch=dead, feature_space=np.zeros((1, 1)))
    with pytest.raises(CalibrationError):
        calibrate_normalization(dead_model, 200, 0)


def test_centering_default_family_passes(small_brickwall_model):
    report = check_centering(small_brickwall_model, 800, 21)
    assert report["passed"]


def test_centering_fails_for_z_generators():
    # Z-rotations commute with the Z observables: f_k == m for every draw
    arch = product(2, 1, generator_axes="z", input_dim=1)
    model = ModelHandle(arch=arch, feature_space=np.zeros((1, 1)))
    report = check_centering(model, 500, 2)
    assert not report["passed"]
    assert report["worst_abs_mean"] == pytest.approx(1.0, abs=1e-12)


def test_centering_requires_positive_samples(single_qubit_model):
    with pytest.raises(ValueError):
        check_centering(single_qubit_model, 0, 1)


def test_eval_components_matches_manual(small_brickwall_model):
    model = small_brickwall_model
    theta = sample_init(model, 17)
    comps = eval_components(model, theta, 1)
    assert comps.shape == (model.arch.m,)
    assert eval_f(model, theta, 1) == pytest.approx(comps.sum() / model.n_m)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(inputs=np.zeros((0, 2)), labels=np.zeros(0))
    with pytest.raises(ValueError):
        Dataset(inputs=[[0.0, 0.0]], labels=[0.5])
    with pytest.raises(ValueError):
        Dataset(inputs=[[0.0, 0.0], [0.0, 0.0]], labels=[1.0, -1.0])
    data = Dataset(inputs=[[0.0, 1.0], [1.0, 0.0]], labels=[1.0, -1.0])
    clone = Dataset.from_json(data.to_json())
    assert np.array_equal(clone.inputs, data.inputs)
    assert np.array_equal(clone.labels, data.labels)
