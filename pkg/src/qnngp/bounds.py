"""Explicit constants and hypotheses of the convergence and lazy-training bounds.

Every constant is transcribed twice (a composed expression tree and one flat
arithmetic line) and the two evaluations are cross-asserted to 1e-12
relative; the constants are the deliverable here and transcription slips are
the dominant risk.  Hypothesis checks never raise: they produce flags with
both sides of each inequality so reports can mark rows hypothesis-unmet.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import SINGULAR_EIG_TOL, KernelMatrix, SingularKernelError, jacobi_eigh

STATUS_HOLDS = "holds"
STATUS_VIOLATED = "violated"
STATUS_UNMET = "hypothesis-unmet"
STATUS_VACUOUS = "vacuous"


class TranscriptionError(RuntimeError):
    """The two independent transcriptions of a constant disagree."""


def _dual(tree: float, flat: float, name: str) -> float:
    if not math.isclose(tree, flat, rel_tol=1e-12, abs_tol=1e-300):
        raise TranscriptionError(f"{name}: expression tree {tree!r} vs flat arithmetic {flat!r}")
    return tree


def stein_constant(d: int) -> float:
    """Hessian regularity constant C(1, d) of the Stein-equation solution."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    tree_parts = (2.0**1.5, (1.0 + 2.0 * d) / d, math.exp(math.lgamma((1.0 + d) / 2.0) - math.lgamma(d / 2.0)))
    tree = tree_parts[0] * tree_parts[1] * tree_parts[2]
    flat = 2.0 ** (3.0 / 2.0) * (1 + 2 * d) / d * math.exp(math.lgamma((d + 1) / 2) - math.lgamma(d / 2))
    return _dual(tree, flat, "stein_constant")


def stein_modulus(d: int, x: float) -> float:
    """Modulus of continuity omega(d, x): x (C - 2 log x) below 1, else C."""
    if x < 0:
        raise ValueError("modulus argument must be nonnegative")
    c = stein_constant(d)
    if x == 0.0:
        return 0.0
    if x <= 1.0:
        return x * (c - 2.0 * math.log(x))
    return c


def _operator_norms(k0bar: np.ndarray) -> tuple[float, float]:
    """(norm of the inverse, norm) of a symmetric positive definite matrix."""
    eigvals, _ = jacobi_eigh(k0bar)
    lam_min, lam_max = float(eigvals[0]), float(eigvals[-1])
    if lam_min <= SINGULAR_EIG_TOL:
        raise SingularKernelError(f"covariance min eigenvalue {lam_min!r}; bound needs the inverse")
    return 1.0 / lam_min, lam_max


def init_bound(
    m: int,
    max_future: int,
    max_past: int,
    n_m: float,
    nbar: int,
    k0bar: "KernelMatrix | np.ndarray",
    degree: int,
    degree_4hop: int,
) -> dict:
    """Initialization-stage Wasserstein bound: headline and pre-simplification forms.

    The headline constant uses only the light-cone cardinalities; the tighter
    form keeps the overlap degrees and the Stein modulus.  Both are returned
    with their building blocks.
    """
    entries = k0bar.entries if isinstance(k0bar, KernelMatrix) else np.asarray(k0bar, dtype=float)
    inv_norm, op_norm = _operator_norms(entries)

    size = nbar**1.5
    conditioning = 2.0 * inv_norm * math.sqrt(op_norm) + 6.0
    cones = float(m) * (max_future * max_past) ** 3.5
    decay = (1.0 + math.log(n_m)) / n_m**3
    headline_tree = size * conditioning * cones * decay
    headline_flat = (
        nbar ** (3.0 / 2.0)
        * (2.0 * inv_norm * op_norm**0.5 + 6.0)
        * m
        * max_future ** (7.0 / 2.0)
        * max_past ** (7.0 / 2.0)
        / n_m**3
        * (1.0 + math.log(n_m))
    )
    headline = _dual(headline_tree, headline_flat, "init_bound headline")

    fluct = math.sqrt(degree_4hop * (2.0 * nbar * degree) ** 2 / n_m**4)
    tight_tree = math.sqrt(nbar) * inv_norm * math.sqrt(op_norm) * fluct + (
        degree * m * nbar / n_m**2
    ) * stein_modulus(nbar, degree / n_m)
    tight_flat = (
        nbar**0.5 * inv_norm * op_norm**0.5 * 2.0 * nbar * degree * degree_4hop**0.5 / n_m**2
        + degree * m * nbar * stein_modulus(nbar, degree / n_m) / n_m**2
    )
    tight = _dual(tight_tree, tight_flat, "init_bound tight")
    return {
        "headline": headline,
        "tight": tight,
        "k0_inv_op_norm": inv_norm,
        "k0_op_norm": op_norm,
    }


def lazy_constants(
    n: int,
    y_norm: float,
    lambda_min_k: float,
    L: int,
    m: int,
    max_future: int,
    max_past: int,
    n_m: float,
    delta: float,
) -> dict:
    """All named quantities of the lazy-training theorem for one configuration.

    A negative square-root discriminant or a failed expressivity hypothesis
    is flagged, never raised; downstream reports mark those rows
    hypothesis-unmet.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly between 0 and 1")
    r_tree = y_norm + math.sqrt(2.0 * n / delta)
    r_flat = y_norm + (2 * n / delta) ** 0.5
    r_delta = _dual(r_tree, r_flat, "R(delta)")

    log_term = math.sqrt(math.log(2.0 * n**2 / delta))
    cone_rate = max_future**2 * max_past / n_m**2
    g_tree = 16.0 * n * math.sqrt(L * m) * cone_rate * log_term
    g_flat = 16.0 * n * (L * m) ** 0.5 * max_future**2 * max_past / n_m**2 * (math.log(2 * n**2 / delta)) ** 0.5
    g_delta = _dual(g_tree, g_flat, "g(delta)")

    hyp_rhs = _dual(
        6.0 * g_tree,
        96.0 * n * (L * m) ** 0.5 * max_future**2 * max_past / n_m**2 * (math.log(2 * n**2 / delta)) ** 0.5,
        "expressivity hypothesis rhs",
    )
    hypothesis_met = lambda_min_k >= hyp_rhs

    out = {
        "r_delta": r_delta,
        "g_delta": g_delta,
        "hyp_lhs": lambda_min_k,
        "hyp_rhs": hyp_rhs,
        "hypothesis_met": bool(hypothesis_met),
        "rho_defined": False,
        "constants_defined": False,
        "rho_m": None,
        "h_delta": None,
        "lambda_tilde_min": None,
        "rhs_grad2_uniform": None,
        "rhs_grad3": None,
    }

    gap = lambda_min_k - g_delta
    if gap <= 0.0:
        return out
    disc_tree = 1.0 - (128.0 * n * math.sqrt(n) * r_delta / gap**2) * (L * m * max_future**3 * max_past / n_m**3)
    disc_flat = 1.0 - 128.0 * n**1.5 * r_delta * L * m * max_future**3 * max_past / (gap**2 * n_m**3)
    disc = _dual(disc_tree, disc_flat, "rho discriminant")
    if disc < 0.0:
        return out

    rho_tree = 0.5 * (n_m**2 / (16.0 * n * L * m * max_future**2 * max_past)) * gap * (1.0 - math.sqrt(disc))
    rho_flat = n_m**2 * gap * (1.0 - disc**0.5) / (32.0 * n * L * m * max_future**2 * max_past)
    rho_m = _dual(rho_tree, rho_flat, "rho(m)")

    h_tree = 16.0 * n * (L * m * max_future**2 * max_past / n_m**2) * rho_m
    h_flat = 16.0 * n * L * m * max_future**2 * max_past * rho_m / n_m**2
    h_delta = _dual(h_tree, h_flat, "h(delta)")

    lam_tilde = lambda_min_k - g_delta - h_delta
    # consistency of the quadratic solution: rho == 2 sqrt(n) R |M| / (N lam_tilde)
    implied = 2.0 * math.sqrt(n) * r_delta * max_future / (n_m * lam_tilde)
    if not math.isclose(rho_m, implied, rel_tol=1e-8):
        raise TranscriptionError(f"rho fixed point violated: {rho_m!r} vs {implied!r}")
    if hypothesis_met and lam_tilde < lambda_min_k / 3.0 * (1.0 - 1e-12):
        raise TranscriptionError(
            f"lambda_tilde {lam_tilde!r} below lambda_min/3 despite the hypothesis holding"
        )

    grow = 1.0 + 1.0 / lam_tilde**3
    rate = L**2 * m**2 * max_future**5 * max_past**2 / n_m**5
    g3_tree = 132.0 * n**2 * r_delta**2 * grow * rate * (1.0 + math.log(n_m))
    g3_flat = (
        132.0
        * n**2
        * r_delta**2
        * (1.0 + lam_tilde**-3.0)
        * L**2
        * m**2
        * max_future**5
        * max_past**2
        / n_m**5
        * (1.0 + math.log(n_m))
    )
    rhs_grad3 = _dual(g3_tree, g3_flat, "lazy sup bound")

    out.update(
        rho_defined=True,
        constants_defined=True,
        rho_m=rho_m,
        h_delta=h_delta,
        lambda_tilde_min=lam_tilde,
        rhs_grad2_uniform=rho_m,
        rhs_grad3=rhs_grad3,
    )
    return out


def lazy_rhs_loss(constants: dict, eta: float, t: float) -> float:
    """Proven decay of the summed squared residuals: R^2 exp(-2 eta lam t)."""
    lam = constants["lambda_tilde_min"]
    return constants["r_delta"] ** 2 * math.exp(-2.0 * eta * lam * t)


def lazy_rhs_drift(constants: dict, eta: float, t: float) -> float:
    lam = constants["lambda_tilde_min"]
    return constants["rho_m"] * (1.0 - math.exp(-eta * lam * t))


def trained_bound(
    nbar: int,
    n: int,
    y_norm: float,
    lambda_min_k: float,
    k0bar: "KernelMatrix | np.ndarray",
    s: float,
    m: int,
    L: int,
    max_future: int,
    max_past: int,
    n_m: float,
) -> dict:
    """Uniform-in-time truncated-Wasserstein bound for the trained network."""
    if lambda_min_k <= 0:
        raise SingularKernelError("trained bound needs a positive analytic-kernel eigenvalue floor")
    entries = k0bar.entries if isinstance(k0bar, KernelMatrix) else np.asarray(k0bar, dtype=float)
    inv_norm, op_norm = _operator_norms(entries)

    term_truncation = 96.0 * s * nbar
    term_conditioning = 8.0 * math.sqrt(nbar) * inv_norm * math.sqrt(op_norm) * (nbar + 4.0 * n**2)
    term_lazy = (
        132.0 * n**2 * math.sqrt(nbar) * (2.0 * y_norm**2 + 4.0 * n) * (1.0 + 27.0 / lambda_min_k**3)
    )
    term_kernel_gap = 2.0 * (math.sqrt(n) + y_norm) * (
        1.0 / lambda_min_k + 6.0 * math.sqrt(nbar * n) / lambda_min_k**2
    )
    c_tree = term_truncation + term_conditioning + term_lazy + term_kernel_gap
    c_flat = (
        96 * s * nbar
        + 8 * nbar**0.5 * inv_norm * op_norm**0.5 * (nbar + 4 * n**2)
        + 132 * n**2 * nbar**0.5 * (2 * y_norm**2 + 4 * n) * (1 + 27 / lambda_min_k**3)
        + 2 * (n**0.5 + y_norm) * (1 / lambda_min_k + 6 * (nbar * n) ** 0.5 / lambda_min_k**2)
    )
    c_gamma = _dual(c_tree, c_flat, "trained-bound prefactor")

    rate_tree = (L**2) * m ** (9.0 / 4.0) * max_future ** (11.0 / 2.0) * max_past ** (9.0 / 2.0) / n_m**5
    gamma_tree = c_gamma * rate_tree * (1.0 + math.log(n_m))
    gamma_flat = c_flat * L**2 * m**2.25 * max_future**5.5 * max_past**4.5 * (1 + math.log(n_m)) / n_m**5
    gamma = _dual(gamma_tree, gamma_flat, "trained bound")
    return {
        "c_gamma": c_gamma,
        "gamma": gamma,
        "summands": {
            "truncation": term_truncation,
            "conditioning": term_conditioning,
            "lazy": term_lazy,
            "kernel_gap": term_kernel_gap,
        },
        "k0_inv_op_norm": inv_norm,
        "k0_op_norm": op_norm,
    }


def diameter_proxy(nbar: int, m: int, n_m: float) -> float:
    """Trivial transport diameter 2 sqrt(nbar) m / N(m); larger bounds are vacuous."""
    return 2.0 * math.sqrt(nbar) * m / n_m


def pair_status(observed: float, bound: float | None, vacuous_above: float, hypothesis_ok: bool = True) -> str:
    if not hypothesis_ok or bound is None:
        return STATUS_UNMET
    if observed > bound:
        return STATUS_VIOLATED
    if bound > vacuous_above:
        return STATUS_VACUOUS
    return STATUS_HOLDS


def assumption_audit(
    n_m: float,
    calib_samples: int,
    m: int,
    L: int,
    max_future: int,
    max_past: int,
    n: int,
    nbar: int,
    lambda_min_k: float,
) -> dict:
    """Boolean status plus both sides for every architecture/kernel assumption."""
    audit: dict[str, dict] = {}

    audit["kernel_invertible"] = {
        "lhs": lambda_min_k,
        "rhs": SINGULAR_EIG_TOL,
        "met": bool(lambda_min_k > SINGULAR_EIG_TOL),
    }

    log_arg = 2.0 * n**2 * math.sqrt(n_m)
    if log_arg >= 1.0:
        a4_rhs = 96.0 * n * math.sqrt(L * m) * max_future**2 * max_past / n_m**2 * math.sqrt(math.log(log_arg))
        a4_met = lambda_min_k >= a4_rhs
    else:
        a4_rhs = float("nan")
        a4_met = False
    audit["kernel_eigenvalue_floor"] = {"lhs": lambda_min_k, "rhs": a4_rhs, "met": bool(a4_met)}

    a4bis_lhs = L * m * max_future**2 * max_past**2 / n_m**3
    a4bis_rhs = 1.0 / (256.0 * math.log(2.0) * nbar)
    audit["kernel_concentration_rate"] = {
        "lhs": a4bis_lhs,
        "rhs": a4bis_rhs,
        "met": bool(a4bis_lhs <= a4bis_rhs),
    }

    nm_cap = math.sqrt(m * max_future * max_past) * (1.0 + 3.0 / math.sqrt(calib_samples))
    audit["normalization_cap"] = {"lhs": n_m, "rhs": nm_cap, "met": bool(n_m <= nm_cap)}

    audit["normalization_at_least_one"] = {"lhs": n_m, "rhs": 1.0, "met": bool(n_m >= 1.0)}
    return audit


@dataclass
class BoundReport:
    """Machine-checkable record: constants, hypothesis flags, observed-vs-bound pairs."""

    constants: dict = field(default_factory=dict)
    hypotheses: dict = field(default_factory=dict)
    pairs: list = field(default_factory=list)

    def add_pair(self, name: str, observed: float, bound: float | None, vacuous_above: float, hypothesis_ok: bool = True) -> dict:
        row = {
            "name": name,
            "observed": observed,
            "bound": bound,
            "status": pair_status(observed, bound, vacuous_above, hypothesis_ok),
        }
        self.pairs.append(row)
        return row

    def worst_status(self) -> str:
        statuses = [p["status"] for p in self.pairs]
        if STATUS_VIOLATED in statuses:
            return STATUS_VIOLATED
        if STATUS_UNMET in statuses or any(not h["met"] for h in self.hypotheses.values()):
            return STATUS_UNMET
        return STATUS_HOLDS

    def to_json(self) -> str:
        def clean(value):
            if isinstance(value, (np.floating, np.integer)):
                return value.item()
            if isinstance(value, dict):
                return {k: clean(v) for k, v in value.items()}
            if isinstance(value, (list, tuple)):
                return [clean(v) for v in value]
            return value

        doc = {
            "constants": clean(self.constants),
            "hypotheses": clean(self.hypotheses),
            "pairs": clean(self.pairs),
            "worst_status": self.worst_status(),
        }
        return json.dumps(doc, indent=2, sort_keys=True)
