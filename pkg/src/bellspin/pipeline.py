"""End-to-end emulated experiment: calibrate a preparation, run the
squeezing-axis, pulse-sweep, and witness shot groups, push everything
through the correction pipeline, and assemble the analysis summary.

The three groups mirror the measurement campaign: the squeezing run pins
c_a, zeta_sq_a, and the clock-shift slope; the sweep run calibrates the
drive so pulse duration converts to analysis angle; the witness run takes
repeated shots at the duration reaching the requested angle.
"""

from __future__ import annotations

import copy
import math
from dataclasses import replace

from .emulator import (
    DriveModel,
    NoiseModel,
    Preparation,
    apply_corrections,
    calibrated_preparation,
    fit_rabi,
    sample_shot,
    tau_for_theta,
    theta_of_tau,
)
from .errors import ConfigError
from .stats import MomentEstimate, db, estimate_moments

DEFAULT_CONFIG = {
    "seed": 1,
    "theta_deg": 128.0,
    "phase_drift": 0.0,
    "branch": "outer",
    "calibration": "measured",
    "targets": {"contrast": 0.980, "zeta_sq": 0.272},
    "drive": {"gamma": 2.464, "delta": -0.016},
    "shots": {"squeezing": 190, "per_tau": 10, "witness": 10},
    "tau_grid_ms": {"start": 0.05, "stop": 2.5, "points": 12},
    "noise": {},
}


def merge_config(overrides: dict | None) -> dict:
    """Layer user overrides onto the default config, rejecting unknown keys."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if not overrides:
        return cfg
    if not isinstance(overrides, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in overrides.items():
        if key not in cfg:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(cfg[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {key!r} must be an object")
            for sub, subval in value.items():
                if key != "noise" and sub not in cfg[key]:
                    raise ConfigError(f"unknown config key {key!r}.{sub!r}")
                cfg[key][sub] = subval
        else:
            cfg[key] = value
    return cfg


def _noise_from_config(cfg: dict) -> NoiseModel:
    try:
        return NoiseModel(**cfg["noise"])
    except TypeError as exc:
        raise ConfigError(f"bad noise model: {exc}") from exc


def _run_group(prep: Preparation, noise: NoiseModel, seed_base: int, start: int,
               taus, drive: DriveModel | None):
    records = []
    counter = start
    for tau in taus:
        records.append(sample_shot(prep, noise, seed_base + counter, tau=tau, drive=drive))
        counter += 1
    return records, counter


def run_experiment(config: dict | None = None):
    """Run the full emulation; returns (summary dict, artifacts dict).

    Deterministic for a fixed config: shot i of the campaign uses seed
    seed*10^6 + i.  The artifacts dict carries the raw shot records, the
    corrected sample groups, and the drive fit for callers that persist them.
    """
    cfg = merge_config(config)
    noise = _noise_from_config(cfg)
    try:
        seed = int(cfg["seed"])
        theta_star = math.radians(float(cfg["theta_deg"]))
        n_squeeze = int(cfg["shots"]["squeezing"])
        per_tau = int(cfg["shots"]["per_tau"])
        n_witness = int(cfg["shots"]["witness"])
        grid = cfg["tau_grid_ms"]
        tau_grid = [
            grid["start"] + (grid["stop"] - grid["start"]) * i / (grid["points"] - 1)
            for i in range(int(grid["points"]))
        ]
        drive = DriveModel(gamma=float(cfg["drive"]["gamma"]),
                           delta=float(cfg["drive"]["delta"]))
        # the preparation is an apparatus property: calibrate it against the
        # standard analysis window so post-selection overrides change the
        # downstream estimate (as in the real dataset), not the recipe
        cal_noise = replace(noise,
                            postselect_lo=NoiseModel.postselect_lo,
                            postselect_hi=NoiseModel.postselect_hi)
        prep = calibrated_preparation(
            cal_noise,
            contrast_target=float(cfg["targets"]["contrast"]),
            zeta_sq_target=float(cfg["targets"]["zeta_sq"]),
            branch=str(cfg["branch"]),
            calibration=str(cfg["calibration"]),
        )
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if n_squeeze < 2 or per_tau < 1 or n_witness < 2:
        raise ConfigError("shot counts too small: squeezing and witness need >= 2, per_tau >= 1")

    # the sweep and witness groups run later than the squeezing group; any
    # phase drift between the runs enters as an extra constant z rotation
    drift_prep = Preparation(
        twist_angle=prep.twist_angle,
        pulses=prep.pulses,
        clock_coeff=prep.clock_coeff,
        phase_offset=prep.phase_offset + float(cfg["phase_drift"]),
        axis=prep.axis,
    )
    seed_base = seed * 1_000_000

    squeeze_records, counter = _run_group(
        prep, noise, seed_base, 0, [0.0] * n_squeeze, None)
    squeezed = apply_corrections(squeeze_records, noise, slope=None)
    c_a, zeta_sq = estimate_moments(squeezed, noise)
    _, zeta_sq_raw = estimate_moments(squeezed, noise, subtract_noise=False)
    slope = squeezed.slope

    # the clock phase lives in the quadrature perpendicular to the mean spin,
    # so after an analysis pulse of angle theta its imprint on the measured
    # ratio scales as cos(theta); the sweep is corrected in two passes, the
    # first (flat slope) only to learn theta(tau)
    rabi_raw = []
    for tau in tau_grid:
        group, counter = _run_group(
            drift_prep, noise, seed_base, counter, [tau] * per_tau, drive)
        rabi_raw.append((tau, group))
    first_groups = [
        apply_corrections(group, noise, slope=slope) for _, group in rabi_raw
    ]
    first_points = [
        (tau, r) for g in first_groups for tau, r in zip(g.taus, g.ratios)
    ]
    fit1, _ = fit_rabi(first_points, full_output=True)

    rabi_records = []
    rabi_groups = []
    for tau, group in rabi_raw:
        rabi_records.extend(group)
        group_slope = slope * math.cos(fit1.phase(tau))
        rabi_groups.append(apply_corrections(group, noise, slope=group_slope))
    fit_points = [
        (tau, r) for g in rabi_groups for tau, r in zip(g.taus, g.ratios)
    ]
    fit, fit_info = fit_rabi(fit_points, full_output=True)

    tau_star = tau_for_theta(fit, theta_star, c_a=c_a.mean)
    witness_records, counter = _run_group(
        drift_prep, noise, seed_base, counter, [tau_star] * n_witness, drive)
    witnessed = apply_corrections(
        witness_records, noise, slope=slope * math.cos(fit.phase(tau_star)))
    ratios = witnessed.ratios
    k = ratios.size
    c_n = MomentEstimate(
        mean=float(ratios.mean()),
        std_error=float(ratios.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0,
        sample_size=k,
    )
    theta_hat = theta_of_tau(fit, tau_star, c_a=c_a.mean)

    # Significance convention: the violation is quoted in standard errors of
    # the c_n measurement at the operating angle, treating zeta_sq, the
    # contrast, and the fitted angle as calibration constants of the witness
    # threshold.  The fully propagated sigma (including the zeta_sq standard
    # error) is reported alongside as the conservative variant.
    def witness_value_at(zeta_mean: float) -> float:
        cth = math.cos(theta_hat)
        return -abs(c_n.mean) + cth * cth * zeta_mean + 1.0 - cth * cth

    def point_significance(w: float) -> float:
        return -w / c_n.std_error if c_n.std_error > 0 else 0.0

    w_val = witness_value_at(zeta_sq.mean)
    w_raw = witness_value_at(zeta_sq_raw.mean)
    cth_sq = math.cos(theta_hat) ** 2
    w_sigma_prop = math.sqrt(
        c_n.std_error ** 2 + cth_sq ** 2 * zeta_sq.std_error ** 2)
    significance = point_significance(w_val)
    significance_raw = point_significance(w_raw)
    significance_prop = -w_val / w_sigma_prop if w_sigma_prop > 0 else 0.0

    contrast = fit.contrast
    xi_sq = zeta_sq.mean / (contrast * contrast) if contrast > 0 else float("inf")

    summary = {
        "config": cfg,
        "calibration": {
            "twist_angle": prep.twist_angle,
            "tilt_angle": prep.pulses[0].angle,
            "clock_coeff": prep.clock_coeff,
        },
        "squeezing": {
            "c_a": c_a.to_json_dict(),
            "zeta_sq": zeta_sq.to_json_dict(),
            "zeta_sq_no_subtraction": zeta_sq_raw.to_json_dict(),
            "slope": slope,
            "n_kept": squeezed.n_kept,
            "n_dropped": squeezed.n_dropped,
        },
        "rabi_fit": {
            "contrast": fit.contrast,
            "tau0": fit.tau0,
            "gamma": fit.gamma,
            "delta": fit.delta,
            "sigmas": [float(s) for s in fit_info["sigmas"]],
            "n_points": len(fit_points),
        },
        "witness": {
            "theta_deg": math.degrees(theta_hat),
            "tau_star_ms": tau_star,
            "c_n": c_n.to_json_dict(),
            "value": w_val,
            "sigma": c_n.std_error,
            "significance": significance,
            "sigma_propagated": w_sigma_prop,
            "significance_propagated": significance_prop,
            "value_no_subtraction": w_raw,
            "significance_no_subtraction": significance_raw,
            "n_kept": witnessed.n_kept,
        },
        "squeezing_report": {
            "xi_sq": xi_sq,
            "xi_sq_db": db(xi_sq) if 0 < xi_sq < float("inf") else None,
        },
    }
    artifacts = {
        "noise": noise,
        "preparation": prep,
        "drive": drive,
        "squeezing_records": squeeze_records,
        "rabi_records": rabi_records,
        "witness_records": witness_records,
        "squeezing_samples": squeezed,
        "rabi_groups": rabi_groups,
        "witness_samples": witnessed,
        "rabi_fit": fit,
        "fit_points": fit_points,
    }
    return summary, artifacts
