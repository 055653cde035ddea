"""Bound constants: closed-form anchors, scaling laws, and hypothesis flags."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qnngp import bounds
from qnngp.circuit import brickwall, product
from qnngp.kernel import SingularKernelError, covariance_init
from qnngp.lightcone import build_lightcones
from qnngp.model import ModelHandle, calibrate_normalization


def gamma_quadrature(x: float) -> float:
    value, _ = quad(lambda t: t ** (x - 1) * math.exp(-t), 0.0, np.inf, limit=200)
    return value


def test_stein_constant_dimension_one():
    assert bounds.stein_constant(1) == pytest.approx(6.0 * math.sqrt(2.0) / math.sqrt(math.pi), rel=1e-12)


def test_stein_constant_wendel_cap():
    for d in range(1, 65):
        assert bounds.stein_constant(d) <= 6.0 * math.sqrt(d)
    with pytest.raises(ValueError):
        bounds.stein_constant(0)


def test_stein_constant_quadrature_oracle():
    previous = 0.0
    for d in range(1, 9):
        via_quad = 2.0**1.5 * (1 + 2 * d) / d * gamma_quadrature((1 + d) / 2) / gamma_quadrature(d / 2)
        value = bounds.stein_constant(d)
        assert value == pytest.approx(via_quad, rel=1e-9)
        assert value > previous  # monotone growth in the dimension
        previous = value


def test_stein_modulus_branches():
    c1 = bounds.stein_constant(1)
    assert bounds.stein_modulus(1, 0.0) == 0.0
    assert bounds.stein_modulus(1, 2.0) == c1
    assert bounds.stein_modulus(1, 1.0) == c1  # log 1 = 0: both branches agree exactly
    assert bounds.stein_modulus(1, 1.0) == 1.0 * (c1 - 2.0 * math.log(1.0))
    with pytest.raises(ValueError):
        bounds.stein_modulus(1, -0.1)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=1, max_value=16),
    st.floats(min_value=0.0, max_value=4.0),
    st.floats(min_value=0.0, max_value=4.0),
)
def test_stein_modulus_is_modulus_of_continuity(d, x, y):
    lo, hi = sorted((x, y))
    w_lo, w_hi = bounds.stein_modulus(d, lo), bounds.stein_modulus(d, hi)
    assert w_lo >= 0.0
    assert w_lo <= w_hi + 1e-12


def manual_init_tight(nbar, kinv, kop, m, n_m, degree, degree_4hop):
    """Independent transcription of the pre-simplification constant."""
    first = math.sqrt(nbar) * kinv * math.sqrt(kop) * math.sqrt(
        degree_4hop * (2.0 * nbar * degree) ** 2 / n_m**4
    )
    x = degree / n_m
    if x <= 1.0:
        omega = x * (bounds.stein_constant(nbar) - 2.0 * math.log(x))
    else:
        omega = bounds.stein_constant(nbar)
    return first + degree * m * nbar / n_m**2 * omega


def test_init_bound_product_single_qubit():
    n_m = 1.0 / math.sqrt(2.0)
    result = bounds.init_bound(
        m=1, max_future=1, max_past=1, n_m=n_m, nbar=1,
        k0bar=np.array([[1.0]]), degree=1, degree_4hop=1,
    )
    manual = manual_init_tight(1, 1.0, 1.0, 1, n_m, 1, 1)
    assert result["tight"] == pytest.approx(manual, rel=1e-12)
    manual_headline = (
        1.0 * (2.0 + 6.0) * 1 / n_m**3 * (1.0 + math.log(n_m))
    )
    assert result["headline"] == pytest.approx(manual_headline, rel=1e-12)
    assert result["headline"] >= result["tight"]


def test_init_bound_nbar_scaling():
    base = bounds.init_bound(
        m=2, max_future=2, max_past=3, n_m=1.4, nbar=2,
        k0bar=np.eye(2), degree=2, degree_4hop=4,
    )
    double = bounds.init_bound(
        m=2, max_future=2, max_past=3, n_m=1.4, nbar=4,
        k0bar=np.eye(4), degree=2, degree_4hop=4,
    )
    assert double["headline"] / base["headline"] == pytest.approx(2.0**1.5, rel=1e-12)


def test_init_bound_headline_dominates_on_calibrated_circuits():
    for m, L in ((2, 1), (3, 2), (4, 2)):
        arch = brickwall(m, L, input_dim=2, encoding_seed=m)
        model = ModelHandle(
            arch=arch, feature_space=np.array([[0.3, -0.2], [0.9, 0.7]])
        )
        calibrate_normalization(model, 500, m)
        table = build_lightcones(arch)
        k0 = covariance_init(model, None, 500, m + 1)
        if k0.singular:
            continue
        result = bounds.init_bound(
            m=m,
            max_future=table.max_future,
            max_past=table.max_past,
            n_m=model.n_m,
            nbar=2,
            k0bar=k0,
            degree=table.degree,
            degree_4hop=table.degree_4hop,
        )
        assert result["headline"] >= result["tight"]


def test_init_bound_rejects_singular_covariance():
    with pytest.raises(SingularKernelError):
        bounds.init_bound(
            m=1, max_future=1, max_past=1, n_m=1.0, nbar=2,
            k0bar=np.ones((2, 2)), degree=1, degree_4hop=1,
        )


def test_lazy_r_delta_example():
    out = bounds.lazy_constants(
        n=1, y_norm=1.0, lambda_min_k=1.0, L=1, m=1,
        max_future=1, max_past=1, n_m=1.0, delta=0.5,
    )
    assert out["r_delta"] == pytest.approx(3.0, rel=1e-12)


def test_lazy_r_delta_monotone_in_delta():
    values = [
        bounds.lazy_constants(
            n=2, y_norm=1.0, lambda_min_k=1.0, L=1, m=1,
            max_future=1, max_past=1, n_m=1.0, delta=d,
        )["r_delta"]
        for d in (0.1, 0.3, 0.6, 0.9, 0.999)
    ]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0 + math.sqrt(2 * 2 / 0.999), rel=1e-12)
    with pytest.raises(ValueError):
        bounds.lazy_constants(
            n=1, y_norm=1.0, lambda_min_k=1.0, L=1, m=1,
            max_future=1, max_past=1, n_m=1.0, delta=1.0,
        )


def synthetic_lazy(lambda_min_k, n=1, y_norm=1.0, L=1, m=1, mf=1, mp=1, n_m=1.0, delta=0.5):
    return bounds.lazy_constants(
        n=n, y_norm=y_norm, lambda_min_k=lambda_min_k, L=L, m=m,
        max_future=mf, max_past=mp, n_m=n_m, delta=delta,
    )


def test_lazy_constructed_high_eigenvalue_configuration():
    out = synthetic_lazy(lambda_min_k=500.0)
    assert out["hypothesis_met"]
    assert out["constants_defined"]
    assert out["lambda_tilde_min"] >= 500.0 / 3.0
    gap = 500.0 - out["g_delta"]
    assert out["rho_m"] <= 4.0 * out["r_delta"] / gap + 1e-12
    # the quadratic fixed point ties rho to lambda_tilde exactly
    implied = 2.0 * out["r_delta"] / out["lambda_tilde_min"]
    assert out["rho_m"] == pytest.approx(implied, rel=1e-9)


def test_lazy_hypothesis_flags():
    # desk-scale eigenvalues sit far below the expressivity threshold
    out = synthetic_lazy(lambda_min_k=0.5, n=2, L=2, m=4, mf=3, mp=6, n_m=1.2)
    assert not out["hypothesis_met"]
    assert out["rho_m"] is None and not out["constants_defined"]
    # large-but-insufficient eigenvalue: gap positive yet discriminant negative
    mid = synthetic_lazy(lambda_min_k=30.0, n=4, y_norm=2.0, delta=0.01)
    if mid["rho_defined"]:
        assert mid["constants_defined"]
    else:
        assert mid["rho_m"] is None


def test_lazy_rhs_helpers():
    out = synthetic_lazy(lambda_min_k=500.0)
    assert bounds.lazy_rhs_loss(out, 1.0, 0.0) == pytest.approx(out["r_delta"] ** 2)
    assert bounds.lazy_rhs_drift(out, 1.0, 0.0) == 0.0
    late = bounds.lazy_rhs_drift(out, 1.0, 1e9)
    assert late == pytest.approx(out["rho_m"], rel=1e-12)
    assert bounds.lazy_rhs_loss(out, 1.0, 10.0) < 1e-6 * out["r_delta"] ** 2


def trained_kwargs(**overrides):
    base = dict(
        nbar=3, n=2, y_norm=math.sqrt(2.0), lambda_min_k=0.8,
        k0bar=np.diag([1.0, 0.9, 0.7]), s=2.0, m=4, L=2,
        max_future=3, max_past=6, n_m=1.3,
    )
    base.update(overrides)
    return base


def test_trained_bound_summands_regroup():
    result = bounds.trained_bound(**trained_kwargs())
    total = sum(result["summands"].values())
    assert result["c_gamma"] == pytest.approx(total, rel=1e-12)


def test_trained_bound_linear_in_truncation():
    r1 = bounds.trained_bound(**trained_kwargs(s=1.0))
    r2 = bounds.trained_bound(**trained_kwargs(s=4.0))
    kw = trained_kwargs()
    prefactor = (
        kw["L"] ** 2 * kw["m"] ** 2.25 * kw["max_future"] ** 5.5 * kw["max_past"] ** 4.5
        / kw["n_m"] ** 5 * (1.0 + math.log(kw["n_m"]))
    )
    slope = (r2["gamma"] - r1["gamma"]) / 3.0
    assert slope == pytest.approx(96.0 * kw["nbar"] * prefactor, rel=1e-10)


def test_trained_bound_normalization_doubling():
    n_m = 2.5
    r1 = bounds.trained_bound(**trained_kwargs(n_m=n_m))
    r2 = bounds.trained_bound(**trained_kwargs(n_m=2 * n_m))
    ratio = r1["gamma"] / r2["gamma"]
    assert ratio > 2.0**5 / (1.0 + math.log(2.0) / math.log(n_m))
    assert ratio == pytest.approx(
        32.0 * (1.0 + math.log(n_m)) / (1.0 + math.log(2 * n_m)), rel=1e-12
    )


def test_trained_bound_rejects_bad_inputs():
    with pytest.raises(SingularKernelError):
        bounds.trained_bound(**trained_kwargs(lambda_min_k=0.0))
    with pytest.raises(SingularKernelError):
        bounds.trained_bound(**trained_kwargs(k0bar=np.zeros((3, 3))))


def test_bound_constants_monotone_in_normalization():
    grid = np.linspace(1.0, 4.0, 13)
    headline, tight, gamma, gvals, rho, hval, grad3 = [], [], [], [], [], [], []
    for n_m in grid:
        ib = bounds.init_bound(
            m=3, max_future=2, max_past=4, n_m=n_m, nbar=2,
            k0bar=np.eye(2), degree=2, degree_4hop=5,
        )
        headline.append(ib["headline"])
        tight.append(ib["tight"])
        gamma.append(bounds.trained_bound(**trained_kwargs(n_m=n_m))["gamma"])
        lazy = synthetic_lazy(lambda_min_k=5000.0, n_m=n_m)
        gvals.append(lazy["g_delta"])
        rho.append(lazy["rho_m"])
        hval.append(lazy["h_delta"])
        grad3.append(lazy["rhs_grad3"])
    for series in (headline, tight, gamma, gvals, rho, hval, grad3):
        assert all(a >= b - 1e-12 for a, b in zip(series, series[1:]))


def test_assumption_audit_cases():
    # single-qubit product circuit: normalization cap holds comfortably
    audit = bounds.assumption_audit(
        n_m=1.0 / math.sqrt(2.0), calib_samples=2000, m=1, L=1,
        max_future=1, max_past=1, n=1, nbar=1, lambda_min_k=4.0,
    )
    assert audit["normalization_cap"]["met"]
    assert not audit["normalization_at_least_one"]["met"]
    assert audit["kernel_invertible"]["met"]

    # transcription check for the concentration-rate inequality
    audit2 = bounds.assumption_audit(
        n_m=2.0, calib_samples=1000, m=8, L=3,
        max_future=6, max_past=12, n=2, nbar=3, lambda_min_k=1.0,
    )
    lhs = 3 * 8 * 6**2 * 12**2 / 2.0**3
    rhs = 1.0 / (256.0 * math.log(2.0) * 3)
    assert audit2["kernel_concentration_rate"]["lhs"] == pytest.approx(lhs, rel=1e-12)
    assert audit2["kernel_concentration_rate"]["rhs"] == pytest.approx(rhs, rel=1e-12)
    assert not audit2["kernel_concentration_rate"]["met"]


def test_assumption_audit_desk_scale_brickwall_fails_floor():
    # m=8 brick-wall: even the largest possible kernel eigenvalue
    # (n * entrywise cap) sits far below the required floor
    arch = brickwall(8, 3, input_dim=2)
    table = build_lightcones(arch)
    n, n_m = 2, math.sqrt(8.0)  # the most favorable normalization allowed
    lam_cap = n * 4.0 * arch.L * arch.m * table.max_future**2 / n_m**2
    audit = bounds.assumption_audit(
        n_m=n_m, calib_samples=2000, m=8, L=3,
        max_future=table.max_future, max_past=table.max_past,
        n=n, nbar=4, lambda_min_k=lam_cap,
    )
    assert not audit["kernel_eigenvalue_floor"]["met"]


def test_pair_status_and_diameter():
    proxy = bounds.diameter_proxy(4, 8, 2.0)
    assert proxy == pytest.approx(2.0 * 2.0 * 8.0 / 2.0)
    assert bounds.pair_status(0.5, 1.0, 10.0) == bounds.STATUS_HOLDS
    assert bounds.pair_status(0.5, 20.0, 10.0) == bounds.STATUS_VACUOUS
    assert bounds.pair_status(2.0, 1.0, 10.0) == bounds.STATUS_VIOLATED
    assert bounds.pair_status(0.5, None, 10.0, hypothesis_ok=False) == bounds.STATUS_UNMET


def test_bound_report_round_trip():
    import json

    report = bounds.BoundReport(constants={"alpha": 1.5})
    report.hypotheses["demo"] = {"lhs": 1.0, "rhs": 2.0, "met": False}
    report.add_pair("w1", 0.1, 5.0, 1.0)
    doc = json.loads(report.to_json())
    assert doc["constants"]["alpha"] == 1.5
    assert doc["pairs"][0]["status"] == bounds.STATUS_VACUOUS
    assert doc["worst_status"] == bounds.STATUS_UNMET
