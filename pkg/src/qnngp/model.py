"""The generated function, its normalization, initialization, and gradients.

The network output is the normalized sum of per-qubit observable expectations
on the circuit's output state.  The normalization constant is calibrated by
Monte Carlo so that the largest initialization variance over the feature
space equals one.  Gradients are exact via the parameter-shift identity
``df/dtheta_i = f(theta + pi/4 e_i) - f(theta - pi/4 e_i)``, valid because
every generator squares to the identity; the adjoint sweep is an equivalent
fast path (the two must agree to 1e-10, enforced in tests).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    ArchitectureSpec,
    expectations_batch,
    gradient_adjoint_batch,
    run_circuit_batch,
)

_SHIFT = math.pi / 4

# keep batched statevector blocks around 2**20 amplitudes (16 MB of
# complex128: larger blocks fall out of cache and run ~4x slower at m=16)
_BATCH_AMPLITUDE_BUDGET = 2**20


class UnknownInputError(KeyError):
    """Input vector is not a member of the finite feature space."""


class CalibrationError(RuntimeError):
    """Normalization missing or impossible (degenerate architecture)."""


@dataclass
class Dataset:
    """Training inputs (rows of the feature space) with +-1 labels."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.labels = np.asarray(self.labels, dtype=float)
        if self.inputs.shape[0] < 1:
            raise ValueError("need at least one training example")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ValueError("one label per training input required")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +-1")
        deduped = {tuple(row) for row in self.inputs}
        if len(deduped) != self.inputs.shape[0]:
            raise ValueError("training inputs must be distinct")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @classmethod
    def from_json(cls, text: str) -> "Dataset":
        doc = json.loads(text)
        return cls(inputs=np.array(doc["inputs"], dtype=float), labels=np.array(doc["labels"], dtype=float))

    def to_json(self) -> str:
        return json.dumps(
            {"inputs": self.inputs.tolist(), "labels": self.labels.tolist()},
            indent=2,
            sort_keys=True,
        )


@dataclass
class ModelHandle:
    """Architecture + finite feature space + (calibrated) normalization."""

    arch: ArchitectureSpec
    feature_space: np.ndarray
    n_m: float | None = None
    calibration: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.feature_space = np.atleast_2d(np.asarray(self.feature_space, dtype=float))
        if self.feature_space.shape[1] != self.arch.input_dim:
            raise ValueError(
                f"feature space dimension {self.feature_space.shape[1]} "
                f"!= architecture input_dim {self.arch.input_dim}"
            )
        if self.n_m is not None and self.n_m <= 0:
            raise ValueError("normalization must be positive")

    @property
    def n_inputs(self) -> int:
        return self.feature_space.shape[0]

    @property
    def batch_size(self) -> int:
        return max(1, _BATCH_AMPLITUDE_BUDGET // 2**self.arch.m)


def resolve_input(model: ModelHandle, x) -> np.ndarray:
    """Map an index or vector to a feature-space row; reject unknown inputs."""
    if isinstance(x, (int, np.integer)):
        if not 0 <= int(x) < model.n_inputs:
            raise UnknownInputError(f"input index {x} outside feature space")
        return model.feature_space[int(x)]
    vec = np.atleast_1d(np.asarray(x, dtype=float))
    for row in model.feature_space:
        if vec.shape == row.shape and np.max(np.abs(vec - row)) <= 1e-12:
            return row
    raise UnknownInputError(f"input {vec} is not in the feature space")


def _require_calibrated(model: ModelHandle) -> float:
    if model.n_m is None:
        raise CalibrationError("model not calibrated; run calibrate_normalization or set n_m")
    return model.n_m


def eval_components(model: ModelHandle, theta: np.ndarray, x) -> np.ndarray:
    """Unnormalized per-qubit expectations f_k(theta, x)."""
    vec = resolve_input(model, x)
    states = run_circuit_batch(model.arch, theta, vec)
    return expectations_batch(states, model.arch)[0]


def eval_f(model: ModelHandle, theta: np.ndarray, x) -> float:
    """Normalized model output: sum_k f_k / N(m)."""
    n_m = _require_calibrated(model)
    return float(eval_components(model, theta, x).sum() / n_m)


def eval_f_all(model: ModelHandle, theta: np.ndarray) -> np.ndarray:
    """Model output on every feature-space row (one circuit run per input)."""
    n_m = _require_calibrated(model)
    return np.array(
        [eval_components(model, theta, i).sum() / n_m for i in range(model.n_inputs)]
    )


def raw_sums_batch(model: ModelHandle, thetas: np.ndarray, x) -> np.ndarray:
    """Unnormalized outputs sum_k f_k for a batch of parameter vectors."""
    vec = resolve_input(model, x)
    out = np.empty(thetas.shape[0] if thetas.ndim == 2 else 1)
    thetas = np.atleast_2d(thetas)
    step = model.batch_size
    for lo in range(0, thetas.shape[0], step):
        chunk = thetas[lo : lo + step]
        states = run_circuit_batch(model.arch, chunk, vec)
        out[lo : lo + chunk.shape[0]] = expectations_batch(states, model.arch).sum(axis=1)
    return out


def grad_sums_batch(model: ModelHandle, thetas: np.ndarray, x) -> np.ndarray:
    """Unnormalized gradients of sum_k f_k for a batch, shape (B, Lm)."""
    vec = resolve_input(model, x)
    thetas = np.atleast_2d(thetas)
    out = np.empty((thetas.shape[0], model.arch.n_params))
    step = model.batch_size
    for lo in range(0, thetas.shape[0], step):
        chunk = thetas[lo : lo + step]
        out[lo : lo + chunk.shape[0]] = gradient_adjoint_batch(model.arch, chunk, vec)
    return out


def grad_components(model: ModelHandle, theta: np.ndarray, x) -> np.ndarray:
    """Parameter-shift Jacobian d f_k / d theta_i, unnormalized, shape (Lm, m)."""
    theta = np.asarray(theta, dtype=float)
    rows = []
    for i in range(model.arch.n_params):
        shift = np.zeros_like(theta)
        shift[i] = _SHIFT
        rows.append(
            eval_components(model, theta + shift, x) - eval_components(model, theta - shift, x)
        )
    return np.array(rows)


def grad_f(model: ModelHandle, theta: np.ndarray, x, method: str = "shift") -> np.ndarray:
    """Exact gradient of the normalized output, shape (Lm,).

    ``method`` selects the default parameter-shift rule or the adjoint fast
    path; both are exact and must agree to 1e-10.
    """
    n_m = _require_calibrated(model)
    theta = np.asarray(theta, dtype=float)
    if method == "adjoint":
        return grad_sums_batch(model, theta, x)[0] / n_m
    if method != "shift":
        raise ValueError(f"unknown gradient method {method!r}")
    vec = resolve_input(model, x)
    shifts = np.tile(theta, (2 * model.arch.n_params, 1))
    for i in range(model.arch.n_params):
        shifts[2 * i, i] += _SHIFT
        shifts[2 * i + 1, i] -= _SHIFT
    sums = np.empty(2 * model.arch.n_params)
    step = model.batch_size
    for lo in range(0, shifts.shape[0], step):
        chunk = shifts[lo : lo + step]
        states = run_circuit_batch(model.arch, chunk, vec)
        sums[lo : lo + chunk.shape[0]] = expectations_batch(states, model.arch).sum(axis=1)
    return (sums[0::2] - sums[1::2]) / n_m


def sample_init(model: ModelHandle, seed: int) -> np.ndarray:
    """I.i.d. uniform-[0, pi] initialization, deterministic per seed."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, math.pi, size=model.arch.n_params)


def sample_init_batch(model: ModelHandle, n_samples: int, seed: int) -> np.ndarray:
    """Stack of independent initializations, shape (S, Lm)."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, math.pi, size=(n_samples, model.arch.n_params))


def raw_output_samples(model: ModelHandle, n_samples: int, seed: int) -> np.ndarray:
    """Unnormalized outputs sum_k f_k over random inits, shape (S, n_inputs)."""
    thetas = sample_init_batch(model, n_samples, seed)
    out = np.empty((n_samples, model.n_inputs))
    for j in range(model.n_inputs):
        out[:, j] = raw_sums_batch(model, thetas, j)
    return out


def calibrate_normalization(model: ModelHandle, n_samples: int, seed: int) -> float:
    """Set N(m) so the largest Monte-Carlo initialization variance is one.

    Returns the calibrated constant and records the per-input second moments
    plus their standard errors on ``model.calibration``.
    """
    if n_samples < 100:
        raise ValueError("calibration needs at least 100 samples")
    raw = raw_output_samples(model, n_samples, seed)
    second_moments = np.mean(raw**2, axis=0)
    stderr = np.std(raw**2, axis=0, ddof=1) / math.sqrt(n_samples)
    peak = float(second_moments.max())
    if peak <= 1e-12:
        raise CalibrationError("generated function is identically zero; cannot normalize")
    model.n_m = math.sqrt(peak)
    model.calibration = {
        "n_m": model.n_m,
        "n_samples": n_samples,
        "seed": seed,
        "second_moments": second_moments.tolist(),
        "second_moment_stderr": stderr.tolist(),
        "argmax_input": int(np.argmax(second_moments)),
    }
    return model.n_m


def check_centering(model: ModelHandle, n_samples: int, seed: int) -> dict:
    """Monte-Carlo audit of the zero-mean assumption on every (qubit, input).

    Passes when every |mean f_k(theta, x)| is below 4/sqrt(S); violations are
    reported, not raised.
    """
    if n_samples <= 0:
        raise ValueError("centering check needs a positive sample count")
    thetas = sample_init_batch(model, n_samples, seed)
    means = np.zeros((model.n_inputs, model.arch.m))
    step = model.batch_size
    for j in range(model.n_inputs):
        vec = model.feature_space[j]
        for lo in range(0, n_samples, step):
            chunk = thetas[lo : lo + step]
            states = run_circuit_batch(model.arch, chunk, vec)
            means[j] += expectations_batch(states, model.arch).sum(axis=0)
    means /= n_samples
    tol = 4.0 / math.sqrt(n_samples)
    worst = float(np.max(np.abs(means)))
    return {
        "passed": bool(worst <= tol),
        "tolerance": tol,
        "worst_abs_mean": worst,
        "means": means.tolist(),
        "n_samples": n_samples,
        "seed": seed,
    }
