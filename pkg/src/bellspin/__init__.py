"""Collective-spin Bell correlation toolkit.

Exact Dicke-basis simulation of squeezed atomic ensembles, the collective
Bell correlation witness and its classical bounds, an emulation of the
measurement pipeline with realistic noise, and the statistical analyses
built on top of it.
"""

from .dicke import (
    DickeState,
    OATParams,
    RotationPulse,
    SpinAxis,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    coherent_state,
    expect_spin,
    expect_spin_sq,
    husimi_q,
    oat_evolve,
    rotate,
    rotate_z,
    z_distribution,
)
from .emulator import (
    CorrectedSamples,
    DriveModel,
    NoiseModel,
    Preparation,
    RabiFit,
    ShotRecord,
    apply_corrections,
    calibrate_tilt,
    calibrate_tilt_measured,
    calibrate_twist,
    calibrated_preparation,
    detector_forward,
    detector_invert,
    expected_measured_zeta_sq,
    fit_rabi,
    sample_shot,
    tau_for_theta,
    theta_of_tau,
)
from .errors import BellspinError, ConfigError, EmptyResultError, NumericalError
from .lhv import (
    DeterministicStrategy,
    brute_force_min,
    classical_argmin,
    classical_min,
    strategy_value,
)
from .pipeline import DEFAULT_CONFIG, merge_config, run_experiment
from .stats import (
    AdversaryReport,
    MomentEstimate,
    adversary_from_witnesses,
    adversary_report,
    bound_at,
    db,
    estimate_moments,
    fit_beta_pm1,
    fit_gamma,
    overlap_probability,
    producibility_bound,
)
from .witness import (
    CorrelatorSet,
    MixedEnsemble,
    MomentSet,
    bell_lhs,
    correlators_from_state,
    m_axis,
    moments_from_state,
    perpendicular_witness,
    transverse_moments,
    wineland_xi_sq,
    witness_curve,
    witness_curve_from_moments,
    witness_from_state,
    witness_value,
    z_bound,
    zeta_sq_at_tilt,
    zeta_sq_min_and_tilt,
)

__version__ = "0.1.0"

__all__ = [
    "AdversaryReport",
    "BellspinError",
    "ConfigError",
    "CorrectedSamples",
    "CorrelatorSet",
    "DEFAULT_CONFIG",
    "DeterministicStrategy",
    "DickeState",
    "DriveModel",
    "EmptyResultError",
    "MixedEnsemble",
    "MomentEstimate",
    "MomentSet",
    "NoiseModel",
    "NumericalError",
    "OATParams",
    "Preparation",
    "RabiFit",
    "RotationPulse",
    "ShotRecord",
    "SpinAxis",
    "X_AXIS",
    "Y_AXIS",
    "Z_AXIS",
    "adversary_from_witnesses",
    "adversary_report",
    "apply_corrections",
    "bell_lhs",
    "bound_at",
    "brute_force_min",
    "calibrate_tilt",
    "calibrate_tilt_measured",
    "calibrate_twist",
    "calibrated_preparation",
    "classical_argmin",
    "classical_min",
    "coherent_state",
    "correlators_from_state",
    "db",
    "detector_forward",
    "detector_invert",
    "estimate_moments",
    "expect_spin",
    "expect_spin_sq",
    "expected_measured_zeta_sq",
    "fit_beta_pm1",
    "fit_gamma",
    "fit_rabi",
    "husimi_q",
    "m_axis",
    "merge_config",
    "moments_from_state",
    "oat_evolve",
    "overlap_probability",
    "perpendicular_witness",
    "producibility_bound",
    "rotate",
    "rotate_z",
    "run_experiment",
    "sample_shot",
    "strategy_value",
    "tau_for_theta",
    "theta_of_tau",
    "transverse_moments",
    "wineland_xi_sq",
    "witness_curve",
    "witness_curve_from_moments",
    "witness_from_state",
    "witness_value",
    "z_bound",
    "z_distribution",
    "zeta_sq_at_tilt",
    "zeta_sq_min_and_tilt",
]
