"""Gradient-flow training, the linearized closed form, and the limit Gaussian.

The flow integrates the function-space-normalized field
``dtheta/dt = -eta * grad f(theta, X) (F(t) - Y)`` so that the induced
function dynamics is ``dF/dt = -eta * K_hat (F - Y)``, matching the
linearized evolution and the limit formulas; the recorded loss is the plain
sum of squared residuals.  Checkpoints are geometric in time plus t = 0, and
"t = infinity" means 50 kernel time constants.  Independent trajectories
(one per seed) are integrated as one stacked system purely to amortize the
per-gate cost; the seeds never couple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .kernel import (
    SINGULAR_EIG_TOL,
    KernelMatrix,
    SingularKernelError,
    jacobi_eigh,
)
from .model import Dataset, ModelHandle, grad_sums_batch, raw_sums_batch, resolve_input

ATOL = 1e-9
RTOL = 1e-7


class IntegrationError(RuntimeError):
    """The flow produced a non-finite derivative or the integrator failed."""


@dataclass
class FlowTrajectory:
    """Checkpointed record of one gradient-flow run."""

    times: np.ndarray
    thetas: np.ndarray
    f_train: np.ndarray
    loss: np.ndarray
    drift: np.ndarray
    f_bar: np.ndarray

    def to_csv(self, path) -> None:
        import csv

        n = self.f_train.shape[1]
        nbar = self.f_bar.shape[1]
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["time", "loss", "drift"]
                + [f"f_train_{i}" for i in range(n)]
                + [f"f_bar_{j}" for j in range(nbar)]
            )
            for t in range(len(self.times)):
                writer.writerow(
                    [repr(float(self.times[t])), repr(float(self.loss[t])), repr(float(self.drift[t]))]
                    + [repr(float(v)) for v in self.f_train[t]]
                    + [repr(float(v)) for v in self.f_bar[t]]
                )


@dataclass
class GaussianSpec:
    """Mean vector and symmetric covariance over the feature space."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        p = self.mean.shape[0]
        if self.cov.shape != (p, p):
            raise ValueError("covariance shape does not match the mean")
        if np.max(np.abs(self.cov - self.cov.T)) > 1e-10 * max(1.0, float(np.max(np.abs(self.cov)))):
            raise ValueError("covariance must be symmetric")
        self.cov = 0.5 * (self.cov + self.cov.T)

    def to_json(self) -> str:
        import json

        return json.dumps({"mean": self.mean.tolist(), "cov": self.cov.tolist()}, indent=2, sort_keys=True)


def checkpoint_schedule(t_final: float, n_checkpoints: int) -> np.ndarray:
    """t = 0 plus a geometric ladder ending at t_final."""
    if t_final <= 0 or n_checkpoints < 1:
        raise ValueError("need t_final > 0 and at least one checkpoint")
    ladder = t_final / (2.0 ** np.arange(n_checkpoints - 1, -1, -1))
    return np.concatenate(([0.0], ladder))


def horizon_from_kernel(k0: KernelMatrix | np.ndarray, eta: float) -> float:
    """Training horizon standing in for t = infinity: 50 / (eta * lambda_min)."""
    entries = k0.entries if isinstance(k0, KernelMatrix) else np.asarray(k0, dtype=float)
    eigvals, _ = jacobi_eigh(entries)
    lam = float(eigvals[0])
    if lam <= SINGULAR_EIG_TOL:
        raise SingularKernelError(f"kernel min eigenvalue {lam!r} too small for a horizon")
    return 50.0 / (eta * lam)


def dataset_indices(model: ModelHandle, data: Dataset) -> list[int]:
    """Positions of the training inputs inside the model's feature space."""
    idx = []
    for row in data.inputs:
        vec = resolve_input(model, row)
        for j in range(model.n_inputs):
            if np.array_equal(model.feature_space[j], vec):
                idx.append(j)
                break
    return idx


def loss_value(f_train: np.ndarray, labels: np.ndarray) -> float:
    """Sum of squared residuals on the training set."""
    return float(np.sum((np.asarray(f_train) - np.asarray(labels)) ** 2))


def _flow_rhs_batch(
    model: ModelHandle, thetas: np.ndarray, train_idx: list[int], labels: np.ndarray, eta: float
) -> np.ndarray:
    """d theta / dt for every batch row, shape (B, Lm)."""
    n_m = model.n_m
    f_train = np.stack(
        [raw_sums_batch(model, thetas, j) / n_m for j in train_idx], axis=1
    )
    residual = f_train - labels[None, :]
    acc = np.zeros_like(thetas)
    for pos, j in enumerate(train_idx):
        grads = grad_sums_batch(model, thetas, j) / n_m
        acc += grads * residual[:, pos][:, None]
    return -eta * acc


def train_gradient_flow_batch(
    model: ModelHandle,
    theta0s: np.ndarray,
    data: Dataset,
    eta: float,
    t_final: float | None = None,
    checkpoints: np.ndarray | None = None,
    n_checkpoints: int = 8,
) -> list[FlowTrajectory]:
    """Integrate many independent gradient flows with shared checkpoints.

    Adaptive embedded Runge-Kutta 4(5) with atol 1e-9 / rtol 1e-7 on the
    stacked system; aborts with a diagnostic on a non-finite derivative.
    Returns one trajectory per row of ``theta0s``.
    """
    if model.n_m is None:
        raise ValueError("model must be calibrated before training")
    if eta < 0:
        raise ValueError("learning rate must be nonnegative")
    if checkpoints is None:
        if t_final is None or t_final <= 0:
            raise ValueError("provide checkpoints or a positive t_final")
        checkpoints = checkpoint_schedule(t_final, n_checkpoints)
    checkpoints = np.asarray(checkpoints, dtype=float)
    if checkpoints[0] != 0.0 or np.any(np.diff(checkpoints) <= 0):
        raise ValueError("checkpoints must start at 0 and increase")
    theta0s = np.atleast_2d(np.asarray(theta0s, dtype=float))
    n_flows, n_params = theta0s.shape
    train_idx = dataset_indices(model, data)
    labels = data.labels

    def rhs(t: float, flat: np.ndarray) -> np.ndarray:
        thetas = flat.reshape(n_flows, n_params)
        deriv = _flow_rhs_batch(model, thetas, train_idx, labels, eta)
        if not np.all(np.isfinite(deriv)):
            raise IntegrationError(f"non-finite derivative at t={t!r}")
        return deriv.ravel()

    t_end = float(checkpoints[-1])
    if t_end == 0.0 or eta == 0.0:
        stacked = np.tile(theta0s.ravel(), (len(checkpoints), 1))
    else:
        sol = solve_ivp(
            rhs,
            (0.0, t_end),
            theta0s.ravel(),
            method="RK45",
            t_eval=checkpoints,
            atol=ATOL,
            rtol=RTOL,
        )
        if not sol.success:
            raise IntegrationError(f"integrator failed: {sol.message}")
        stacked = sol.y.T

    n_check = len(checkpoints)
    thetas_at = stacked.reshape(n_check, n_flows, n_params)
    f_bar = np.empty((n_check, n_flows, model.n_inputs))
    for t in range(n_check):
        for j in range(model.n_inputs):
            f_bar[t, :, j] = raw_sums_batch(model, thetas_at[t], j) / model.n_m

    trajectories = []
    for b in range(n_flows):
        f_train = f_bar[:, b, :][:, train_idx]
        loss = np.array([loss_value(f_train[t], labels) for t in range(n_check)])
        drift = np.array(
            [float(np.max(np.abs(thetas_at[t, b] - theta0s[b]))) for t in range(n_check)]
        )
        trajectories.append(
            FlowTrajectory(
                times=checkpoints.copy(),
                thetas=thetas_at[:, b, :].copy(),
                f_train=f_train.copy(),
                loss=loss,
                drift=drift,
                f_bar=f_bar[:, b, :].copy(),
            )
        )
    return trajectories


def train_gradient_flow(
    model: ModelHandle,
    theta0: np.ndarray,
    data: Dataset,
    eta: float,
    t_final: float | None = None,
    checkpoints: np.ndarray | None = None,
) -> FlowTrajectory:
    """Integrate one gradient flow and record checkpointed diagnostics."""
    return train_gradient_flow_batch(
        model, np.asarray(theta0, dtype=float)[None, :], data, eta, t_final, checkpoints
    )[0]


class LinearizedFlow:
    """Closed-form linearized predictions from one initialization.

    Precomputes the gradient features at theta0 over the whole feature space
    and the eigendecomposition of the empirical kernel on the training
    inputs, so predictions at any time are matrix-free.
    """

    def __init__(self, model: ModelHandle, theta0: np.ndarray, data: Dataset, eta: float):
        self.eta = float(eta)
        self.train_idx = dataset_indices(model, data)
        self.labels = data.labels
        n_m = model.n_m
        if n_m is None:
            raise ValueError("model must be calibrated")
        theta0 = np.asarray(theta0, dtype=float)
        self.features = np.stack(
            [grad_sums_batch(model, theta0, j)[0] / n_m for j in range(model.n_inputs)]
        )
        self.f0 = np.array(
            [raw_sums_batch(model, theta0, j)[0] / n_m for j in range(model.n_inputs)]
        )
        g_train = self.features[self.train_idx]
        k0 = g_train @ g_train.T
        self.eigvals, self.eigvecs = jacobi_eigh(k0)
        if self.eigvals[0] <= SINGULAR_EIG_TOL:
            raise SingularKernelError(
                f"empirical kernel at initialization has min eigenvalue {self.eigvals[0]!r}"
            )
        self.k0 = k0
        self.residual0 = self.f0[self.train_idx] - self.labels

    def _weight(self, t: float) -> np.ndarray:
        # K0^{-1} (1 - exp(-eta K0 t)) through the spectrum
        if math.isinf(t):
            gains = 1.0 / self.eigvals
        else:
            gains = (1.0 - np.exp(-self.eta * self.eigvals * t)) / self.eigvals
        return self.eigvecs @ np.diag(gains) @ self.eigvecs.T

    def predict(self, t: float, input_pos: int) -> float:
        k_x = self.features[input_pos] @ self.features[self.train_idx].T
        return float(self.f0[input_pos] - k_x @ self._weight(t) @ self.residual0)

    def predict_all(self, t: float) -> np.ndarray:
        k_star = self.features @ self.features[self.train_idx].T
        return self.f0 - k_star @ self._weight(t) @ self.residual0


def linear_flow_closed_form(
    model: ModelHandle,
    theta0: np.ndarray,
    data: Dataset,
    eta: float,
    t: float,
    x,
) -> float:
    """Linearized prediction at time t for one input (exact closed form)."""
    flow = LinearizedFlow(model, theta0, data, eta)
    vec = resolve_input(model, x)
    for j in range(model.n_inputs):
        if np.array_equal(model.feature_space[j], vec):
            return flow.predict(t, j)
    raise AssertionError("unreachable: resolve_input guarantees membership")


def _spectral_gain(k_train: np.ndarray, eta: float, t: float) -> np.ndarray:
    """K^{-1} (1 - exp(-t eta K)) for a symmetric positive definite block."""
    eigvals, eigvecs = jacobi_eigh(k_train)
    if eigvals[0] <= SINGULAR_EIG_TOL:
        raise SingularKernelError(f"kernel block min eigenvalue {eigvals[0]!r}")
    if math.isinf(t):
        gains = 1.0 / eigvals
    else:
        gains = (1.0 - np.exp(-eta * eigvals * t)) / eigvals
    return eigvecs @ np.diag(gains) @ eigvecs.T


def limit_gaussian(
    k0_full: KernelMatrix | np.ndarray,
    k_full: KernelMatrix | np.ndarray,
    train_positions: list[int],
    labels: np.ndarray,
    eta: float,
    t: float,
) -> GaussianSpec:
    """Limit Gaussian process of the trained network at time t.

    ``k0_full`` is the initialization covariance over the whole feature
    space, ``k_full`` the analytic tangent kernel over the same inputs;
    ``train_positions`` locate the training inputs within them.
    """
    k0 = k0_full.entries if isinstance(k0_full, KernelMatrix) else np.asarray(k0_full, dtype=float)
    k = k_full.entries if isinstance(k_full, KernelMatrix) else np.asarray(k_full, dtype=float)
    sel = np.asarray(train_positions, dtype=int)
    labels = np.asarray(labels, dtype=float)
    k_train = k[np.ix_(sel, sel)]
    k_star = k[:, sel]
    gain = _spectral_gain(k_train, eta, t)
    weight = k_star @ gain
    mean = weight @ labels
    cross = weight @ k0[sel, :]
    cov = k0 - cross - cross.T + weight @ k0[np.ix_(sel, sel)] @ weight.T
    return GaussianSpec(mean=mean, cov=0.5 * (cov + cov.T))


def sample_gaussian(spec: GaussianSpec, n_samples: int, seed: int):
    """I.i.d. draws via a symmetric spectral factorization plus 1e-10 jitter."""
    from .transport import SampleSet

    cov = spec.cov + 1e-10 * np.eye(spec.cov.shape[0])
    eigvals, eigvecs = jacobi_eigh(cov)
    if eigvals[0] < -1e-8:
        raise ValueError(f"covariance not factorizable after jitter (min eig {eigvals[0]!r})")
    root = eigvecs @ np.diag(np.sqrt(np.maximum(eigvals, 0.0)))
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n_samples, spec.mean.shape[0]))
    return SampleSet(points=spec.mean + draws @ root.T)


def lazy_metrics(
    traj: FlowTrajectory,
    model: ModelHandle,
    theta0: np.ndarray,
    data: Dataset,
    eta: float,
    table,
    lambda_min_k: float,
    delta: float,
) -> dict:
    """Per-checkpoint lazy-training diagnostics next to the theory bounds.

    Reports loss, parameter drift, and the worst linearization gap over the
    feature space; right-hand sides come from the bounds module and are
    present only when the lazy constants are defined, with the expressivity
    hypothesis reported separately.
    """
    from . import bounds

    flow = LinearizedFlow(model, theta0, data, eta)
    consts = bounds.lazy_constants(
        n=data.n,
        y_norm=float(np.linalg.norm(data.labels)),
        lambda_min_k=lambda_min_k,
        L=model.arch.L,
        m=model.arch.m,
        max_future=table.max_future,
        max_past=table.max_past,
        n_m=model.n_m,
        delta=delta,
    )
    rows = []
    for t_pos, t in enumerate(traj.times):
        sup_dev = float(np.max(np.abs(traj.f_bar[t_pos] - flow.predict_all(float(t)))))
        row = {
            "time": float(t),
            "loss": float(traj.loss[t_pos]),
            "drift": float(traj.drift[t_pos]),
            "sup_linearization_gap": sup_dev,
        }
        if consts["constants_defined"]:
            row["rhs_loss"] = bounds.lazy_rhs_loss(consts, eta, float(t))
            row["rhs_drift"] = bounds.lazy_rhs_drift(consts, eta, float(t))
            row["rhs_gap"] = consts["rhs_grad3"]
            row["loss_ok"] = row["loss"] <= row["rhs_loss"] + 1e-12
            row["drift_ok"] = row["drift"] <= row["rhs_drift"] + 1e-12
            row["gap_ok"] = row["sup_linearization_gap"] <= row["rhs_gap"] + 1e-12
        rows.append(row)
    return {"rows": rows, "constants": consts}
