"""Experiment orchestration: configs, the three experiments, persistence.

Each command writes one run directory containing a canonical copy of the
config, calibration and light-cone JSON, kernel CSVs, trajectory CSVs, a
bound report with both sides of every inequality, and a human-readable
summary.  Outputs contain no timestamps, so identical config + seed re-runs
are byte-identical.  Exit codes: 0 all asserted properties hold, 2 a
non-vacuous bound was violated, 3 a hypothesis is unmet (informational).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import bounds, dynamics, kernel, lightcone, transport
from .circuit import ArchitectureSpec, brickwall
from .model import (
    Dataset,
    ModelHandle,
    calibrate_normalization,
    check_centering,
    raw_sums_batch,
    sample_init_batch,
)

EXIT_OK = 0
EXIT_VIOLATED = 2
EXIT_UNMET = 3

_STATUS_EXIT = {
    bounds.STATUS_HOLDS: EXIT_OK,
    bounds.STATUS_VACUOUS: EXIT_OK,
    bounds.STATUS_UNMET: EXIT_UNMET,
    bounds.STATUS_VIOLATED: EXIT_VIOLATED,
}


class ConfigError(ValueError):
    """Malformed experiment configuration; the message carries the field path."""


@dataclass
class ExperimentConfig:
    """Everything one run needs; all sampling seeds derive from ``seed``."""

    architecture: dict
    feature_space: np.ndarray
    dataset: Dataset | None
    s_calib: int = 2000
    s_cov: int = 2000
    s_kernel: int = 400
    s_w1: int = 1024
    n_seeds: int = 16
    seed: int = 0
    eta: float = 1.0
    n_checkpoints: int = 6
    t_final: float | None = None
    truncation_s: float = 2.0
    delta: float = 0.25
    bootstrap_resamples: int = 200

    def canonical_json(self) -> str:
        doc = {
            "architecture": self.architecture,
            "feature_space": self.feature_space.tolist(),
            "dataset": None
            if self.dataset is None
            else {"inputs": self.dataset.inputs.tolist(), "labels": self.dataset.labels.tolist()},
            "s_calib": self.s_calib,
            "s_cov": self.s_cov,
            "s_kernel": self.s_kernel,
            "s_w1": self.s_w1,
            "n_seeds": self.n_seeds,
            "seed": self.seed,
            "eta": self.eta,
            "n_checkpoints": self.n_checkpoints,
            "t_final": self.t_final,
            "truncation_s": self.truncation_s,
            "delta": self.delta,
            "bootstrap_resamples": self.bootstrap_resamples,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def _field(doc: dict, path: str, kind, required: bool = True, default=None):
    node = doc
    crumbs = path.split(".")
    for crumb in crumbs:
        if not isinstance(node, dict) or crumb not in node:
            if required:
                raise ConfigError(f"missing config field: {path}")
            return default
        node = node[crumb]
    if kind is float and isinstance(node, int):
        node = float(node)
    if kind is not None and not isinstance(node, kind):
        raise ConfigError(f"config field {path} has type {type(node).__name__}")
    return node


def load_config(doc: dict) -> ExperimentConfig:
    arch_doc = _field(doc, "architecture", dict)
    try:
        ArchitectureSpec.from_json(json.dumps(arch_doc))
    except Exception as exc:
        raise ConfigError(f"architecture: {exc}") from exc
    feature_space = np.array(_field(doc, "feature_space", list), dtype=float)
    if feature_space.ndim != 2:
        raise ConfigError("feature_space: expected a list of input vectors")

    dataset = None
    ds_doc = _field(doc, "dataset", dict, required=False)
    if ds_doc is not None:
        try:
            dataset = Dataset(
                inputs=np.array(_field(doc, "dataset.inputs", list), dtype=float),
                labels=np.array(_field(doc, "dataset.labels", list), dtype=float),
            )
        except ValueError as exc:
            raise ConfigError(f"dataset: {exc}") from exc

    config = ExperimentConfig(
        architecture=arch_doc,
        feature_space=feature_space,
        dataset=dataset,
        s_calib=_field(doc, "s_calib", int, required=False, default=2000),
        s_cov=_field(doc, "s_cov", int, required=False, default=2000),
        s_kernel=_field(doc, "s_kernel", int, required=False, default=400),
        s_w1=_field(doc, "s_w1", int, required=False, default=1024),
        n_seeds=_field(doc, "n_seeds", int, required=False, default=16),
        seed=_field(doc, "seed", int, required=False, default=0),
        eta=_field(doc, "eta", float, required=False, default=1.0),
        n_checkpoints=_field(doc, "n_checkpoints", int, required=False, default=6),
        t_final=_field(doc, "t_final", float, required=False),
        truncation_s=_field(doc, "truncation_s", float, required=False, default=2.0),
        delta=_field(doc, "delta", float, required=False, default=0.25),
        bootstrap_resamples=_field(doc, "bootstrap_resamples", int, required=False, default=200),
    )
    for name in ("s_calib", "s_cov", "s_kernel", "s_w1", "n_seeds", "bootstrap_resamples"):
        if getattr(config, name) <= 0:
            raise ConfigError(f"config field {name} must be positive")
    if not 0.0 < config.delta < 1.0:
        raise ConfigError("config field delta must lie in (0, 1)")
    if config.truncation_s <= 0:
        raise ConfigError("config field truncation_s must be positive")
    return config


def load_config_file(path: str) -> ExperimentConfig:
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return load_config(doc)


def subseeds(config: ExperimentConfig) -> dict:
    """Deterministic per-purpose seeds derived from the run seed."""
    state = np.random.SeedSequence(config.seed).generate_state(8)
    names = ("calib", "cov", "kernel", "w1", "gauss", "bootstrap", "flows", "extra")
    return {name: int(state[i]) for i, name in enumerate(names)}


def build_model(config: ExperimentConfig) -> tuple[ModelHandle, lightcone.LightConeTable]:
    arch = ArchitectureSpec.from_json(json.dumps(config.architecture))
    model = ModelHandle(arch=arch, feature_space=config.feature_space)
    return model, lightcone.build_lightcones(arch)


def _write(out_dir: str, name: str, text: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w") as handle:
        handle.write(text)


def _start_run(config: ExperimentConfig, out_dir: str) -> None:
    _write(out_dir, "config.json", config.canonical_json())


def _summary_text(lines: list[str]) -> str:
    return "\n".join(lines) + "\n"


def _calibrate(config: ExperimentConfig, model: ModelHandle, seeds: dict) -> dict:
    n_m = calibrate_normalization(model, config.s_calib, seeds["calib"])
    centering = check_centering(model, config.s_calib, seeds["calib"] + 1)
    return {"n_m": n_m, "centering": centering}


def cmd_calibrate(config: ExperimentConfig, out_dir: str) -> tuple[dict, int]:
    """Calibrate the normalization and dump light cones plus a JSON summary."""
    _start_run(config, out_dir)
    model, table = build_model(config)
    seeds = subseeds(config)
    calib = _calibrate(config, model, seeds)
    summary = {
        "n_m": model.n_m,
        "max_future": table.max_future,
        "max_past": table.max_past,
        "degree": table.degree,
        "degree_4hop": table.degree_4hop,
        "centering_passed": calib["centering"]["passed"],
        "seeds": seeds,
    }
    _write(out_dir, "calibration.json", json.dumps({**model.calibration, **summary}, indent=2, sort_keys=True))
    _write(out_dir, "lightcones.json", table.to_json())
    _write(
        out_dir,
        "summary.txt",
        _summary_text(
            [
                f"normalization N(m) = {model.n_m!r}",
                f"max future cone |M| = {table.max_future}, max past cone |N| = {table.max_past}",
                f"degree D = {table.degree}, 4-hop degree = {table.degree_4hop}",
                f"centering check passed: {calib['centering']['passed']}",
            ]
        ),
    )
    return summary, EXIT_OK if calib["centering"]["passed"] else EXIT_UNMET


def cmd_lightcones(config: ExperimentConfig, out_dir: str) -> tuple[dict, int]:
    """Dump the dependency sets of the configured architecture."""
    _start_run(config, out_dir)
    _, table = build_model(config)
    _write(out_dir, "lightcones.json", table.to_json())
    summary = {
        "degree": table.degree,
        "degree_4hop": table.degree_4hop,
        "max_future": table.max_future,
        "max_past": table.max_past,
    }
    _write(
        out_dir,
        "summary.txt",
        _summary_text([f"{k} = {v}" for k, v in sorted(summary.items())]),
    )
    return summary, EXIT_OK


def _init_cloud(config: ExperimentConfig, model: ModelHandle, seeds: dict) -> transport.SampleSet:
    thetas = sample_init_batch(model, config.s_w1, seeds["w1"])
    cloud = np.empty((config.s_w1, model.n_inputs))
    for j in range(model.n_inputs):
        cloud[:, j] = raw_sums_batch(model, thetas, j) / model.n_m
    return transport.SampleSet(points=cloud)


def cmd_init_gauss(config: ExperimentConfig, out_dir: str) -> tuple[dict, int]:
    """Initialization-stage experiment: output cloud vs. the matched Gaussian."""
    _start_run(config, out_dir)
    model, table = build_model(config)
    seeds = subseeds(config)
    _calibrate(config, model, seeds)
    k0 = kernel.covariance_init(model, None, config.s_cov, seeds["cov"])
    if k0.singular:
        raise kernel.SingularKernelError(
            f"initialization covariance singular (min eig {k0.min_eig!r})"
        )

    cloud_net = _init_cloud(config, model, seeds)
    gauss = dynamics.GaussianSpec(mean=np.zeros(model.n_inputs), cov=k0.entries)
    cloud_gauss = dynamics.sample_gaussian(gauss, config.s_w1, seeds["gauss"])

    observed = transport.w1_exact(cloud_net, cloud_gauss)
    observed_trunc = transport.w1_truncated(cloud_net, cloud_gauss, config.truncation_s)
    stderr = transport.bootstrap_w1_stderr(
        cloud_net, cloud_gauss, config.bootstrap_resamples, seeds["bootstrap"]
    )

    ib = bounds.init_bound(
        m=model.arch.m,
        max_future=table.max_future,
        max_past=table.max_past,
        n_m=model.n_m,
        nbar=model.n_inputs,
        k0bar=k0,
        degree=table.degree,
        degree_4hop=table.degree_4hop,
    )
    proxy = bounds.diameter_proxy(model.n_inputs, model.arch.m, model.n_m)
    report = bounds.BoundReport(
        constants={
            "n_m": model.n_m,
            "alpha_headline": ib["headline"],
            "alpha_tight": ib["tight"],
            "w1_bootstrap_stderr": stderr,
            "diameter_proxy": proxy,
        }
    )
    report.add_pair("w1_vs_tight_constant", observed, ib["tight"], proxy)
    report.add_pair("w1_vs_headline_constant", observed, ib["headline"], proxy)
    report.add_pair("w1_truncated_vs_headline_constant", observed_trunc, ib["headline"], proxy)

    cloud_net.to_csv(os.path.join(out_dir, "samples_network.csv"))
    cloud_gauss.to_csv(os.path.join(out_dir, "samples_gaussian.csv"))
    k0.to_csv(os.path.join(out_dir, "covariance_init.csv"))
    _write(out_dir, "bound_report.json", report.to_json())
    _write(
        out_dir,
        "summary.txt",
        _summary_text(
            [
                f"observed W1 = {observed!r} (bootstrap stderr {stderr!r})",
                f"observed truncated W1 (s={config.truncation_s!r}) = {observed_trunc!r}",
                f"tight bound = {ib['tight']!r}",
                f"headline bound = {ib['headline']!r}",
                f"diameter proxy = {proxy!r}",
                f"worst status: {report.worst_status()}",
            ]
        ),
    )
    summary = {
        "observed_w1": observed,
        "observed_w1_truncated": observed_trunc,
        "stderr": stderr,
        "alpha_tight": ib["tight"],
        "alpha_headline": ib["headline"],
        "status": report.worst_status(),
    }
    return summary, _STATUS_EXIT[report.worst_status()]


def _require_dataset(config: ExperimentConfig) -> Dataset:
    if config.dataset is None:
        raise ConfigError("missing config field: dataset")
    return config.dataset


def _schedule(config: ExperimentConfig, model: ModelHandle, k_train: np.ndarray) -> np.ndarray:
    if config.t_final is not None:
        t_final = config.t_final
    else:
        t_final = dynamics.horizon_from_kernel(k_train, config.eta)
    return dynamics.checkpoint_schedule(t_final, config.n_checkpoints)


def _lazy_hypothesis_flags(audit: dict) -> bool:
    return bool(
        audit["kernel_invertible"]["met"]
        and audit["kernel_eigenvalue_floor"]["met"]
        and audit["kernel_concentration_rate"]["met"]
    )


def cmd_train(config: ExperimentConfig, out_dir: str) -> tuple[dict, int]:
    """Trained-network experiment: per-checkpoint cloud vs. the limit Gaussian."""
    _start_run(config, out_dir)
    data = _require_dataset(config)
    model, table = build_model(config)
    seeds = subseeds(config)
    _calibrate(config, model, seeds)

    k0_full = kernel.covariance_init(model, None, config.s_cov, seeds["cov"])
    k_full = kernel.analytic_ntk(model, None, config.s_kernel, seeds["kernel"])
    train_pos = dynamics.dataset_indices(model, data)
    k_train = k_full.submatrix(train_pos)
    lam_min = kernel.min_eigenvalue(k_train)
    if lam_min <= kernel.SINGULAR_EIG_TOL:
        raise kernel.SingularKernelError(f"analytic kernel on the training inputs has min eig {lam_min!r}")

    audit = bounds.assumption_audit(
        n_m=model.n_m,
        calib_samples=config.s_calib,
        m=model.arch.m,
        L=model.arch.L,
        max_future=table.max_future,
        max_past=table.max_past,
        n=data.n,
        nbar=model.n_inputs,
        lambda_min_k=lam_min,
    )
    hypothesis_ok = _lazy_hypothesis_flags(audit)

    checkpoints = _schedule(config, model, k_train)
    theta0s = sample_init_batch(model, config.s_w1, seeds["w1"])
    trajectories = dynamics.train_gradient_flow_batch(
        model, theta0s, data, config.eta, checkpoints=checkpoints
    )
    trajectories[0].to_csv(os.path.join(out_dir, "trajectory_seed0.csv"))

    max_loss_increase = max(
        float(np.max(np.diff(traj.loss))) if len(traj.loss) > 1 else 0.0
        for traj in trajectories
    )
    loss_monotone = max_loss_increase <= 1e-8

    tb = bounds.trained_bound(
        nbar=model.n_inputs,
        n=data.n,
        y_norm=float(np.linalg.norm(data.labels)),
        lambda_min_k=lam_min,
        k0bar=k0_full,
        s=config.truncation_s,
        m=model.arch.m,
        L=model.arch.L,
        max_future=table.max_future,
        max_past=table.max_past,
        n_m=model.n_m,
    )
    proxy = bounds.diameter_proxy(model.n_inputs, model.arch.m, model.n_m)
    report = bounds.BoundReport(
        constants={
            "n_m": model.n_m,
            "lambda_min_analytic": lam_min,
            "gamma": tb["gamma"],
            "c_gamma": tb["c_gamma"],
            "diameter_proxy": proxy,
            "max_loss_increase": max_loss_increase,
        },
        hypotheses=audit,
    )

    gauss_state = np.random.SeedSequence(seeds["gauss"]).generate_state(len(checkpoints))
    boot_state = np.random.SeedSequence(seeds["bootstrap"]).generate_state(len(checkpoints))
    rows = []
    for t_pos, t in enumerate(checkpoints):
        cloud_true = transport.SampleSet(
            points=np.stack([traj.f_bar[t_pos] for traj in trajectories])
        )
        spec_t = dynamics.limit_gaussian(
            k0_full, k_full, train_pos, data.labels, config.eta, float(t)
        )
        cloud_gauss = dynamics.sample_gaussian(spec_t, config.s_w1, int(gauss_state[t_pos]))
        observed = transport.w1_truncated(cloud_true, cloud_gauss, config.truncation_s)
        # bootstrap errors at the scientifically interesting endpoints only;
        # the per-row contract is (observed, bound, status)
        stderr = None
        if t_pos in (0, len(checkpoints) - 1):
            stderr = transport.bootstrap_w1_stderr(
                cloud_true,
                cloud_gauss,
                config.bootstrap_resamples,
                int(boot_state[t_pos]),
                s=config.truncation_s,
            )
        pair = report.add_pair(
            f"w1_truncated_t={float(t)!r}", observed, tb["gamma"], proxy, hypothesis_ok
        )
        rows.append(
            {
                "time": float(t),
                "observed_w1_truncated": observed,
                "stderr": stderr,
                "bound": tb["gamma"],
                "status": pair["status"],
            }
        )

    if not loss_monotone:
        report.add_pair("loss_monotone_slack", max_loss_increase, 1e-8, math.inf)

    _write(out_dir, "bound_report.json", report.to_json())
    _write(
        out_dir,
        "checkpoints.json",
        json.dumps({"rows": rows, "loss_monotone": loss_monotone}, indent=2, sort_keys=True),
    )
    k0_full.to_csv(os.path.join(out_dir, "covariance_init.csv"))
    k_full.to_csv(os.path.join(out_dir, "kernel_analytic.csv"))
    _write(
        out_dir,
        "summary.txt",
        _summary_text(
            [f"lambda_min(K on train) = {lam_min!r}", f"uniform-in-time bound = {tb['gamma']!r}"]
            + [
                f"t={row['time']!r}: observed {row['observed_w1_truncated']!r} "
                f"(stderr {row['stderr']!r}) [{row['status']}]"
                for row in rows
            ]
            + [f"loss monotone within 1e-8: {loss_monotone}", f"worst status: {report.worst_status()}"]
        ),
    )
    summary = {
        "rows": rows,
        "loss_monotone": loss_monotone,
        "gamma": tb["gamma"],
        "lambda_min": lam_min,
        "status": report.worst_status(),
    }
    return summary, _STATUS_EXIT[report.worst_status()]


def cmd_lazy(config: ExperimentConfig, out_dir: str) -> tuple[dict, int]:
    """Lazy-training experiment over seeds: observed drifts vs. theorem bounds."""
    _start_run(config, out_dir)
    data = _require_dataset(config)
    model, table = build_model(config)
    seeds = subseeds(config)
    _calibrate(config, model, seeds)

    train_pos = dynamics.dataset_indices(model, data)
    k_train_mat = kernel.analytic_ntk(model, train_pos, config.s_kernel, seeds["kernel"])
    lam_min = kernel.min_eigenvalue(k_train_mat)

    checkpoints = _schedule(config, model, k_train_mat.entries) if lam_min > kernel.SINGULAR_EIG_TOL else dynamics.checkpoint_schedule(10.0, config.n_checkpoints)
    theta0s = sample_init_batch(model, config.n_seeds, seeds["flows"])
    trajectories = dynamics.train_gradient_flow_batch(
        model, theta0s, data, config.eta, checkpoints=checkpoints
    )

    per_seed = []
    holds = 0
    constants = None
    for b, traj in enumerate(trajectories):
        metrics = dynamics.lazy_metrics(
            traj, model, theta0s[b], data, config.eta, table, lam_min, config.delta
        )
        constants = metrics["constants"]
        seed_ok = None
        if constants["constants_defined"]:
            seed_ok = all(
                row["loss_ok"] and row["drift_ok"] and row["gap_ok"] for row in metrics["rows"]
            )
            holds += int(seed_ok)
        per_seed.append({"seed_index": b, "rows": metrics["rows"], "all_hold": seed_ok})
        traj.to_csv(os.path.join(out_dir, f"trajectory_seed{b}.csv"))

    report = bounds.BoundReport(
        constants={
            "n_m": model.n_m,
            "lambda_min_analytic": lam_min,
            **{k: v for k, v in (constants or {}).items()},
        },
        hypotheses={
            "expressivity": {
                "lhs": constants["hyp_lhs"] if constants else lam_min,
                "rhs": constants["hyp_rhs"] if constants else float("nan"),
                "met": bool(constants and constants["hypothesis_met"]),
            }
        },
    )
    fraction = None
    if constants and constants["constants_defined"]:
        fraction = holds / len(trajectories)
        slack = 3.0 * math.sqrt(config.delta * (1.0 - config.delta) / len(trajectories))
        report.add_pair(
            "fraction_not_holding_vs_delta",
            1.0 - fraction,
            config.delta + slack,
            math.inf,
            hypothesis_ok=constants["hypothesis_met"],
        )
        for b, entry in enumerate(per_seed):
            worst_gap = max(row["sup_linearization_gap"] for row in entry["rows"])
            report.add_pair(
                f"seed{b}_sup_gap",
                worst_gap,
                constants["rhs_grad3"],
                math.inf,
                hypothesis_ok=constants["hypothesis_met"],
            )
    else:
        report.add_pair("lazy_bounds", float("nan"), None, math.inf, hypothesis_ok=False)

    _write(out_dir, "bound_report.json", report.to_json())
    _write(out_dir, "lazy_report.json", json.dumps({"per_seed": per_seed, "fraction_all_hold": fraction}, indent=2, sort_keys=True))
    _write(
        out_dir,
        "summary.txt",
        _summary_text(
            [
                f"lambda_min(K on train) = {lam_min!r}",
                f"expressivity hypothesis met: {bool(constants and constants['hypothesis_met'])}",
                f"fraction of seeds with all bounds holding: {fraction!r}",
                f"worst status: {report.worst_status()}",
            ]
        ),
    )
    summary = {
        "fraction_all_hold": fraction,
        "lambda_min": lam_min,
        "constants": constants,
        "status": report.worst_status(),
    }
    return summary, _STATUS_EXIT[report.worst_status()]


def cmd_bounds_report(config: ExperimentConfig, out_dir: str) -> tuple[dict, int]:
    """Evaluate every constant and hypothesis without running any flow."""
    _start_run(config, out_dir)
    model, table = build_model(config)
    seeds = subseeds(config)
    _calibrate(config, model, seeds)
    k0 = kernel.covariance_init(model, None, config.s_cov, seeds["cov"])

    constants = {"n_m": model.n_m}
    hypotheses = {}
    if not k0.singular:
        ib = bounds.init_bound(
            m=model.arch.m,
            max_future=table.max_future,
            max_past=table.max_past,
            n_m=model.n_m,
            nbar=model.n_inputs,
            k0bar=k0,
            degree=table.degree,
            degree_4hop=table.degree_4hop,
        )
        constants.update(alpha_headline=ib["headline"], alpha_tight=ib["tight"])
    if config.dataset is not None:
        data = config.dataset
        train_pos = dynamics.dataset_indices(model, data)
        k_full = kernel.analytic_ntk(model, None, config.s_kernel, seeds["kernel"])
        lam_min = kernel.min_eigenvalue(k_full.submatrix(train_pos))
        hypotheses = bounds.assumption_audit(
            n_m=model.n_m,
            calib_samples=config.s_calib,
            m=model.arch.m,
            L=model.arch.L,
            max_future=table.max_future,
            max_past=table.max_past,
            n=data.n,
            nbar=model.n_inputs,
            lambda_min_k=lam_min,
        )
        constants["lambda_min_analytic"] = lam_min
        lazy = bounds.lazy_constants(
            n=data.n,
            y_norm=float(np.linalg.norm(data.labels)),
            lambda_min_k=lam_min,
            L=model.arch.L,
            m=model.arch.m,
            max_future=table.max_future,
            max_past=table.max_past,
            n_m=model.n_m,
            delta=config.delta,
        )
        constants.update({f"lazy_{k}": v for k, v in lazy.items()})
        if lam_min > kernel.SINGULAR_EIG_TOL and not k0.singular:
            tb = bounds.trained_bound(
                nbar=model.n_inputs,
                n=data.n,
                y_norm=float(np.linalg.norm(data.labels)),
                lambda_min_k=lam_min,
                k0bar=k0,
                s=config.truncation_s,
                m=model.arch.m,
                L=model.arch.L,
                max_future=table.max_future,
                max_past=table.max_past,
                n_m=model.n_m,
            )
            constants.update(gamma=tb["gamma"], c_gamma=tb["c_gamma"])

    report = bounds.BoundReport(constants=constants, hypotheses=hypotheses)
    _write(out_dir, "bound_report.json", report.to_json())
    _write(
        out_dir,
        "summary.txt",
        _summary_text(
            [f"{k} = {v!r}" for k, v in sorted(constants.items())]
            + [f"hypothesis {k}: met={v['met']}" for k, v in sorted(hypotheses.items())]
        ),
    )
    return {"constants": constants, "hypotheses": hypotheses}, _STATUS_EXIT[report.worst_status()]


def width_trend(
    widths: list[int],
    seed: int,
    input_dim: int = 2,
    s_calib: int = 2000,
    s_cov: int = 2000,
    s_w1: int = 1024,
    bootstrap_resamples: int = 200,
    out_dir: str | None = None,
) -> list[dict]:
    """Initialization-stage W1 across a log-depth brick-wall width sweep.

    Uses L = ceil(log2 m) and a shared two-input feature space; returns one
    row per width with the observed distance and its bootstrap stderr.
    """
    feature_space = [[0.7, -0.4], [-0.5, 0.9]]
    rows = []
    for pos, m in enumerate(widths):
        depth = max(1, math.ceil(math.log2(m)))
        arch = brickwall(m, depth, input_dim=input_dim, encoding_seed=seed + pos)
        arch_doc = json.loads(arch.to_json())
        config = load_config(
            {
                "architecture": arch_doc,
                "feature_space": feature_space,
                "s_calib": s_calib,
                "s_cov": s_cov,
                "s_w1": s_w1,
                "seed": seed,
                "bootstrap_resamples": bootstrap_resamples,
            }
        )
        run_dir = os.path.join(out_dir, f"width_{m}") if out_dir else os.path.join(".", f"width_{m}")
        summary, _ = cmd_init_gauss(config, run_dir)
        rows.append({"m": m, "w1": summary["observed_w1"], "stderr": summary["stderr"]})
    return rows
