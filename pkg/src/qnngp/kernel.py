"""Tangent kernels: empirical, Monte-Carlo analytic, initialization covariance.

All matrices here are small (at most a few dozen inputs), so the symmetric
eigensolves use a dependency-free cyclic Jacobi sweep; every Monte-Carlo
estimate carries per-entry standard errors so assertions can use 3-sigma
tolerances.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    CalibrationError,
    ModelHandle,
    grad_f,
    grad_sums_batch,
    raw_sums_batch,
    sample_init_batch,
)

SINGULAR_EIG_TOL = 1e-10


class SingularKernelError(RuntimeError):
    """A kernel matrix that must be inverted is numerically singular."""


@dataclass
class KernelMatrix:
    """Symmetric kernel over a list of feature-space indices.

    ``sample_count`` is 0 for an empirical kernel at a single parameter
    draw; Monte-Carlo estimates carry ``stderr`` (same shape as ``entries``).
    """

    entries: np.ndarray
    input_indices: tuple[int, ...]
    sample_count: int = 0
    stderr: np.ndarray | None = None
    min_eig: float | None = None
    singular: bool = False

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=float)
        n = self.entries.shape[0]
        if self.entries.shape != (n, n):
            raise ValueError("kernel entries must form a square matrix")
        if len(self.input_indices) != n:
            raise ValueError("one input identifier per row required")
        if np.max(np.abs(self.entries - self.entries.T)) > 1e-12 * max(1.0, float(np.max(np.abs(self.entries)))):
            raise ValueError("kernel matrix must be symmetric")
        self.entries = 0.5 * (self.entries + self.entries.T)

    def submatrix(self, positions: list[int]) -> np.ndarray:
        sel = np.asarray(positions, dtype=int)
        return self.entries[np.ix_(sel, sel)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["input"] + [f"x{j}" for j in self.input_indices])
            for i, row in zip(self.input_indices, self.entries):
                writer.writerow([f"x{i}"] + [repr(float(v)) for v in row])


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues/-vectors of a real symmetric matrix by cyclic Jacobi.

    Returns eigenvalues in ascending order and the matching orthonormal
    eigenvector columns.  Robust for the PSD matrices this package produces.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("jacobi_eigh expects a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    vecs = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(a, -1) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-2 * tol * scale:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = c * a[:, p] - s * a[:, q]
                col_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = col_p, col_q
                row_p = c * a[p, :] - s * a[q, :]
                row_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = row_p, row_q
                a[p, q] = a[q, p] = 0.0
                vec_p = c * vecs[:, p] - s * vecs[:, q]
                vec_q = s * vecs[:, p] + c * vecs[:, q]
                vecs[:, p], vecs[:, q] = vec_p, vec_q
    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals, kind="stable")
    return eigvals[order], vecs[:, order]


def min_eigenvalue(kernel: "KernelMatrix | np.ndarray") -> float:
    """Smallest eigenvalue via the symmetric eigensolve."""
    entries = kernel.entries if isinstance(kernel, KernelMatrix) else np.asarray(kernel, dtype=float)
    eigvals, _ = jacobi_eigh(entries)
    return float(eigvals[0])


def operator_norm(matrix: np.ndarray) -> float:
    eigvals, _ = jacobi_eigh(matrix)
    return float(np.max(np.abs(eigvals)))


def _resolve_indices(model: ModelHandle, inputs) -> list[int]:
    if inputs is None:
        return list(range(model.n_inputs))
    return [int(i) for i in inputs]


def _attach_spectrum(kmat: KernelMatrix) -> KernelMatrix:
    kmat.min_eig = min_eigenvalue(kmat)
    kmat.singular = kmat.min_eig <= SINGULAR_EIG_TOL
    return kmat


def empirical_ntk(model: ModelHandle, theta: np.ndarray, inputs=None, method: str = "shift") -> KernelMatrix:
    """Gram matrix of parameter gradients at a fixed parameter vector."""
    idx = _resolve_indices(model, inputs)
    grads = np.array([grad_f(model, theta, j, method=method) for j in idx])
    return KernelMatrix(entries=grads @ grads.T, input_indices=tuple(idx), sample_count=0)


def _gradient_stack(model: ModelHandle, thetas: np.ndarray, idx: list[int]) -> np.ndarray:
    """Normalized gradient features for S draws and p inputs, shape (S, p, Lm)."""
    n_m = model.n_m
    if n_m is None:
        raise CalibrationError("model not calibrated; kernels need N(m)")
    out = np.empty((thetas.shape[0], len(idx), model.arch.n_params))
    for pos, j in enumerate(idx):
        out[:, pos, :] = grad_sums_batch(model, thetas, j) / n_m
    return out


def analytic_ntk(model: ModelHandle, inputs, n_samples: int, seed: int) -> KernelMatrix:
    """Entrywise Monte-Carlo mean of the empirical kernel over initializations."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    idx = _resolve_indices(model, inputs)
    thetas = sample_init_batch(model, n_samples, seed)
    grads = _gradient_stack(model, thetas, idx)
    k_samples = np.einsum("sip,sjp->sij", grads, grads)
    mean = k_samples.mean(axis=0)
    if n_samples > 1:
        stderr = k_samples.std(axis=0, ddof=1) / math.sqrt(n_samples)
    else:
        stderr = np.zeros_like(mean)
    kmat = KernelMatrix(
        entries=0.5 * (mean + mean.T),
        input_indices=tuple(idx),
        sample_count=n_samples,
        stderr=stderr,
    )
    return _attach_spectrum(kmat)


def covariance_init(model: ModelHandle, inputs, n_samples: int, seed: int) -> KernelMatrix:
    """Monte-Carlo estimate of the initialization covariance of the output.

    A singular estimate (smallest eigenvalue at or below 1e-10) is flagged,
    since the initialization bound needs the inverse.
    """
    n_m = model.n_m
    if n_m is None:
        raise CalibrationError("model not calibrated; covariance needs N(m)")
    idx = _resolve_indices(model, inputs)
    thetas = sample_init_batch(model, n_samples, seed)
    f_mat = np.empty((n_samples, len(idx)))
    for pos, j in enumerate(idx):
        f_mat[:, pos] = raw_sums_batch(model, thetas, j) / n_m
    outer = np.einsum("si,sj->sij", f_mat, f_mat)
    mean = outer.mean(axis=0)
    if n_samples > 1:
        stderr = outer.std(axis=0, ddof=1) / math.sqrt(n_samples)
    else:
        stderr = np.zeros_like(mean)
    kmat = KernelMatrix(
        entries=0.5 * (mean + mean.T),
        input_indices=tuple(idx),
        sample_count=n_samples,
        stderr=stderr,
    )
    return _attach_spectrum(kmat)


def concentration_exponent_rhs(
    epsilon: float, n_m: float, L: int, m: int, max_future: int, max_past: int
) -> float:
    """Tail probability bound for |empirical - analytic| kernel deviations."""
    exponent = -(n_m**4) * epsilon**2 / (256.0 * L * m * max_future**4 * max_past**2)
    return float(math.exp(exponent))


def concentration_check(
    model: ModelHandle,
    inputs,
    k_analytic: KernelMatrix,
    epsilons,
    trials: int,
    seed: int,
    max_future: int | None = None,
    max_past: int | None = None,
    table=None,
) -> dict:
    """Empirical exceedance frequencies of kernel deviations vs. the tail bound.

    For every input pair and every epsilon, reports the observed frequency of
    |K_hat - K| >= epsilon over ``trials`` random initializations next to the
    theoretical right-hand side; consistency requires frequency <= rhs plus a
    3-sigma binomial slack whenever the rhs is informative (< 1).
    """
    if table is not None:
        max_future, max_past = table.max_future, table.max_past
    if max_future is None or max_past is None:
        raise ValueError("provide either a light-cone table or (max_future, max_past)")
    if model.n_m is None:
        raise CalibrationError("model not calibrated; concentration bound needs N(m)")
    idx = _resolve_indices(model, inputs)
    pos = {j: t for t, j in enumerate(k_analytic.input_indices)}
    sel = [pos[j] for j in idx]
    k_ref = k_analytic.entries[np.ix_(sel, sel)]
    epsilons = [float(e) for e in np.atleast_1d(epsilons)]

    thetas = sample_init_batch(model, trials, seed)
    grads = _gradient_stack(model, thetas, idx)
    k_samples = np.einsum("sip,sjp->sij", grads, grads)
    deviations = np.abs(k_samples - k_ref)

    rows = []
    consistent = True
    for eps in epsilons:
        rhs = concentration_exponent_rhs(eps, model.n_m, model.arch.L, model.arch.m, max_future, max_past)
        for a in range(len(idx)):
            for b in range(a, len(idx)):
                freq = float(np.mean(deviations[:, a, b] >= eps))
                vacuous = rhs >= 1.0 - 1e-12
                if vacuous:
                    ok = True
                else:
                    slack = 3.0 * math.sqrt(rhs * (1.0 - rhs) / trials)
                    ok = freq <= rhs + slack
                consistent = consistent and ok
                rows.append(
                    {
                        "pair": (idx[a], idx[b]),
                        "epsilon": eps,
                        "frequency": freq,
                        "rhs": rhs,
                        "vacuous": vacuous,
                        "consistent": ok,
                    }
                )
    return {"rows": rows, "trials": trials, "consistent": consistent, "seed": seed}
