"""Desk-scale laboratory for quantum neural network training dynamics.

Simulates layered parameterized circuits exactly, trains them with gradient
flow, builds their linearized dynamics and limit Gaussian processes, and
verifies the quantitative convergence and lazy-training bounds with an exact
empirical Wasserstein-1 solver.
"""

from . import bounds, circuit, dynamics, harness, kernel, lightcone, model, transport
from .circuit import ArchitectureSpec, LayerSpec, brickwall, product, ring, run_circuit
from .kernel import KernelMatrix, analytic_ntk, covariance_init, empirical_ntk, min_eigenvalue
from .lightcone import LightConeTable, build_lightcones
from .model import Dataset, ModelHandle, calibrate_normalization, eval_f, grad_f, sample_init
from .dynamics import (
    FlowTrajectory,
    GaussianSpec,
    limit_gaussian,
    linear_flow_closed_form,
    sample_gaussian,
    train_gradient_flow,
)
from .transport import SampleSet, w1_exact, w1_gaussian_1d, w1_truncated

__version__ = "0.1.0"

__all__ = [
    "ArchitectureSpec",
    "Dataset",
    "FlowTrajectory",
    "GaussianSpec",
    "KernelMatrix",
    "LayerSpec",
    "LightConeTable",
    "ModelHandle",
    "SampleSet",
    "analytic_ntk",
    "bounds",
    "brickwall",
    "build_lightcones",
    "calibrate_normalization",
    "circuit",
    "covariance_init",
    "dynamics",
    "empirical_ntk",
    "eval_f",
    "grad_f",
    "harness",
    "kernel",
    "lightcone",
    "limit_gaussian",
    "linear_flow_closed_form",
    "min_eigenvalue",
    "model",
    "product",
    "ring",
    "run_circuit",
    "sample_gaussian",
    "sample_init",
    "train_gradient_flow",
    "transport",
    "w1_exact",
    "w1_gaussian_1d",
    "w1_truncated",
]
