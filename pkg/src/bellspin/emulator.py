"""Monte Carlo emulation of the squeezing experiment, shot by shot.

One shot: draw an atom number, build the twisted and tilted N-atom state,
apply an atom-number-dependent z phase (collisional clock shift) plus any
analysis pulse, project S_z, then push the ideal counts through the
detector model (quadratic imaging response inverted, Gaussian counting
noise added, clamped at zero counts).

The companion routines reproduce the data pipeline applied to the real
measurements: quadratic count correction, total-number post-selection,
clock-trend removal, and the sinusoid calibration fit for the analysis
pulse area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .dicke import (
    DickeState,
    OATParams,
    RotationPulse,
    SpinAxis,
    X_AXIS,
    coherent_state,
    oat_evolve,
    rotate,
    rotate_z,
    z_distribution,
)
from .errors import EmptyResultError, NumericalError
from .witness import zeta_sq_at_tilt, zeta_sq_min_and_tilt


@dataclass(frozen=True)
class NoiseModel:
    """Preparation, detection, and systematic-effect parameters.

    Defaults are the experimental values: n_mean/n_sigma describe the
    shot-to-shot atom number, det_sigma_i the Gaussian counting noise of the
    two imaged states, nu_i the quadratic imaging correction, clock_slope the
    per-atom trend of the measured ratio, and the postselect window the
    accepted total atom number.
    """

    n_mean: float = 474.0
    n_sigma: float = 27.0
    det_sigma_1: float = 4.5
    det_sigma_2: float = 3.9
    nu_1: float = 1.46e-4
    nu_2: float = 2.57e-4
    clock_slope: float = -6.8e-4
    postselect_lo: int = 425
    postselect_hi: int = 520

    def __post_init__(self):
        if self.n_sigma < 0 or self.det_sigma_1 < 0 or self.det_sigma_2 < 0:
            raise ValueError("noise sigmas must be nonnegative")
        if self.postselect_lo > self.postselect_hi:
            raise ValueError("post-selection window is empty")

    def to_json_dict(self) -> dict:
        return {
            "n_mean": self.n_mean,
            "n_sigma": self.n_sigma,
            "det_sigma_1": self.det_sigma_1,
            "det_sigma_2": self.det_sigma_2,
            "nu_1": self.nu_1,
            "nu_2": self.nu_2,
            "clock_slope": self.clock_slope,
            "postselect_lo": self.postselect_lo,
            "postselect_hi": self.postselect_hi,
        }


@dataclass(frozen=True)
class ShotRecord:
    """Detected (pre-correction) atom numbers of one emulated shot."""

    n1_det: float
    n2_det: float
    tau: float = 0.0
    seed_id: int = 0

    def __post_init__(self):
        if self.n1_det < 0 or self.n2_det < 0:
            raise ValueError("detected counts must be nonnegative")


@dataclass(frozen=True)
class RabiFit:
    """Parameters of the pulse-area calibration r(tau) = contrast * sin(tau0 + gamma tau + delta tau^2)."""

    contrast: float
    tau0: float
    gamma: float
    delta: float

    def __post_init__(self):
        vals = (self.contrast, self.tau0, self.gamma, self.delta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("fit parameters must be finite")
        # contrast is normalized nonnegative; values slightly above 1 can occur
        # in noisy fits and are legitimate estimates, so only the sign is pinned
        if self.contrast < 0:
            raise ValueError("contrast must be nonnegative")

    def phase(self, tau: float) -> float:
        return self.tau0 + self.gamma * tau + self.delta * tau * tau

    def to_json_dict(self) -> dict:
        return {
            "contrast": self.contrast,
            "tau0": self.tau0,
            "gamma": self.gamma,
            "delta": self.delta,
        }


@dataclass(frozen=True)
class DriveModel:
    """Analysis pulse generator: area gamma*tau + delta*tau^2 about a fixed axis."""

    gamma: float = 2.464
    delta: float = -0.016
    axis_phase: float = -0.5 * math.pi

    def pulse(self, tau: float) -> RotationPulse:
        return RotationPulse(self.gamma * tau + self.delta * tau * tau, self.axis_phase)


@dataclass(frozen=True)
class Preparation:
    """State preparation recipe shared by all shots of a run.

    The clock shift enters as a z rotation linear in the drawn atom number,
    clock_coeff * (N - n_mean), applied before the analysis pulses;
    phase_offset adds a constant z rotation (run-to-run phase drift).
    """

    twist_angle: float = 0.0
    pulses: tuple = ()
    clock_coeff: float = 0.0
    phase_offset: float = 0.0
    axis: SpinAxis = X_AXIS


def detector_forward(n_det: float, nu: float) -> float:
    """Quadratic imaging correction: true atom number from detected counts."""
    return n_det + nu * n_det * n_det


def detector_invert(n_true: float, nu: float) -> float:
    """Detected counts whose corrected value is n_true (inverse of detector_forward)."""
    if nu == 0.0:
        return n_true
    return (math.sqrt(1.0 + 4.0 * nu * n_true) - 1.0) / (2.0 * nu)


def sample_shot(prep: Preparation, noise: NoiseModel, rng_seed: int,
                tau: float = 0.0, drive: DriveModel | None = None) -> ShotRecord:
    """Emulate one experimental shot; deterministic given rng_seed."""
    rng = np.random.default_rng(rng_seed)
    while True:
        n = int(round(rng.normal(noise.n_mean, noise.n_sigma)))
        if n >= 1:
            break
    state = coherent_state(n, prep.axis)
    if prep.twist_angle != 0.0:
        state = oat_evolve(state, OATParams(prep.twist_angle, n))
    zrot = prep.clock_coeff * (n - noise.n_mean) + prep.phase_offset
    if zrot != 0.0:
        state = rotate_z(state, zrot)
    for pulse in prep.pulses:
        state = rotate(state, pulse)
    if drive is not None and tau != 0.0:
        state = rotate(state, drive.pulse(tau))

    probs = z_distribution(state)
    k = int(rng.choice(probs.size, p=probs))
    n1 = float(n - k)               # m = N/2 - k, so N_1 = N/2 + m = N - k
    n2 = float(k)
    # detection acts on raw camera counts: undo the quadratic correction,
    # then add counting noise there (the pipeline later re-applies the map)
    n1_det = detector_invert(n1, noise.nu_1) + rng.normal(0.0, noise.det_sigma_1)
    n2_det = detector_invert(n2, noise.nu_2) + rng.normal(0.0, noise.det_sigma_2)
    return ShotRecord(
        n1_det=max(0.0, n1_det),
        n2_det=max(0.0, n2_det),
        tau=tau,
        seed_id=int(rng_seed),
    )


@dataclass(frozen=True)
class CorrectedSamples:
    """Post-selected, corrected analysis samples: one ratio 2 S_a / N per kept shot."""

    ratios: np.ndarray
    n_totals: np.ndarray
    taus: np.ndarray
    slope: float
    n_dropped: int

    @property
    def n_kept(self) -> int:
        return int(self.ratios.size)


def apply_corrections(records, noise: NoiseModel, slope: float | None = None) -> CorrectedSamples:
    """Correct detected counts, post-select on total N, remove the clock trend.

    slope=None fits the per-atom trend of ratio vs (N - <N>) by least squares
    (so a second pass would fit exactly zero); passing a number subtracts
    that given slope instead, e.g. one calibrated on a larger dataset.
    Either way the sample mean is untouched.
    """
    records = list(records)
    if not records:
        raise ValueError("no shot records to correct")
    n1 = np.array([detector_forward(r.n1_det, noise.nu_1) for r in records])
    n2 = np.array([detector_forward(r.n2_det, noise.nu_2) for r in records])
    taus = np.array([r.tau for r in records])
    ntot = n1 + n2
    keep = (ntot >= noise.postselect_lo) & (ntot <= noise.postselect_hi)
    if not keep.any():
        raise EmptyResultError(
            f"post-selection window [{noise.postselect_lo}, {noise.postselect_hi}] kept 0 of {len(records)} shots"
        )
    n1, n2, ntot, taus = n1[keep], n2[keep], ntot[keep], taus[keep]
    ratios = (n1 - n2) / ntot
    dn = ntot - ntot.mean()
    if slope is None:
        denom = float(dn @ dn)
        slope = float(dn @ ratios) / denom if denom > 0 else 0.0
    ratios = ratios - slope * dn
    return CorrectedSamples(
        ratios=ratios,
        n_totals=ntot,
        taus=taus,
        slope=float(slope),
        n_dropped=int(len(records) - ntot.size),
    )


# ---------------------------------------------------------------------------
# pulse-area calibration fit

def _rabi_model(params: np.ndarray, taus: np.ndarray) -> np.ndarray:
    c, tau0, gamma, delta = params
    return c * np.sin(tau0 + gamma * taus + delta * taus * taus)


def _rabi_initial_guess(taus: np.ndarray, rs: np.ndarray) -> np.ndarray:
    """Scan pulse rates, solving the linear-in-(A, B) problem at each."""
    best = None
    for g in np.linspace(0.2, 8.0, 160):
        design = np.column_stack([np.sin(g * taus), np.cos(g * taus)])
        coef, *_ = np.linalg.lstsq(design, rs, rcond=None)
        rss = float(np.sum((design @ coef - rs) ** 2))
        if best is None or rss < best[0]:
            best = (rss, g, coef)
    _, g, (a, b) = best
    return np.array([math.hypot(a, b), math.atan2(b, a), g, 0.0])


def fit_rabi(tau_samples, full_output: bool = False):
    """Least-squares fit of contrast * sin(tau0 + gamma tau + delta tau^2).

    Damped Gauss-Newton with the analytic Jacobian; converged when the
    relative parameter step drops below 1e-10, failed after 200 iterations.
    """
    pairs = [(float(t), float(r)) for t, r in tau_samples]
    taus = np.array([t for t, _ in pairs])
    rs = np.array([r for _, r in pairs])
    if np.unique(taus).size < 4:
        raise ValueError("fit_rabi needs at least 4 distinct tau values")

    params = _rabi_initial_guess(taus, rs)
    rss = float(np.sum((rs - _rabi_model(params, taus)) ** 2))
    iterations = 0
    for iterations in range(1, 201):
        c, tau0, gamma, delta = params
        phase = tau0 + gamma * taus + delta * taus * taus
        resid = rs - c * np.sin(phase)
        ccos = c * np.cos(phase)
        jac = np.column_stack([np.sin(phase), ccos, ccos * taus, ccos * taus * taus])
        try:
            step = np.linalg.solve(jac.T @ jac, jac.T @ resid)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"fit_rabi normal equations singular: {exc}") from exc
        scale = 1.0
        for _ in range(40):
            trial = params + scale * step
            trial_rss = float(np.sum((rs - _rabi_model(trial, taus)) ** 2))
            if trial_rss <= rss + 1e-15:
                break
            scale *= 0.5
        else:
            raise NumericalError(
                f"fit_rabi stalled at iteration {iterations}, rss {rss:.3e}"
            )
        params, rss = trial, trial_rss
        if np.linalg.norm(scale * step) < 1e-10 * max(1.0, float(np.linalg.norm(params))):
            break
    else:
        raise NumericalError(f"fit_rabi did not converge in 200 iterations, rss {rss:.3e}")

    c, tau0, gamma, delta = (float(v) for v in params)
    if c < 0.0:
        c, tau0 = -c, tau0 + math.pi
    tau0 = math.remainder(tau0, 2.0 * math.pi)
    fit = RabiFit(contrast=c, tau0=tau0, gamma=gamma, delta=delta)
    if not full_output:
        return fit

    phase = tau0 + gamma * taus + delta * taus * taus
    resid = rs - c * np.sin(phase)
    ccos = c * np.cos(phase)
    jac = np.column_stack([np.sin(phase), ccos, ccos * taus, ccos * taus * taus])
    dof = max(1, taus.size - 4)
    s2 = float(resid @ resid) / dof
    try:
        cov = np.linalg.inv(jac.T @ jac) * s2
        sigmas = np.sqrt(np.maximum(0.0, np.diag(cov)))
    except np.linalg.LinAlgError:
        sigmas = np.full(4, np.nan)
    return fit, {
        "sigmas": sigmas,
        "residuals": resid,
        "iterations": iterations,
        "rss": float(resid @ resid),
    }


def theta_of_tau(fit: RabiFit, tau: float, c_a: float = 0.0) -> float:
    """Analysis angle theta(tau) = tau0 + gamma tau + delta tau^2 - arcsin(c_a / contrast)."""
    if abs(c_a) > fit.contrast:
        raise ValueError("|c_a| cannot exceed the fitted contrast")
    return fit.phase(tau) - math.asin(c_a / fit.contrast)


def tau_for_theta(fit: RabiFit, theta: float, c_a: float = 0.0) -> float:
    """Smallest nonnegative pulse duration reaching theta; inverts theta_of_tau."""
    offset = fit.tau0 - math.asin(c_a / fit.contrast) - theta
    if abs(fit.delta) < 1e-12:
        tau = -offset / fit.gamma
        if tau < 0:
            raise NumericalError(f"target angle {theta} not reachable with tau >= 0")
        return tau
    disc = fit.gamma * fit.gamma - 4.0 * fit.delta * offset
    if disc < 0:
        raise NumericalError(f"target angle {theta} beyond the drive turning point")
    root = math.sqrt(disc)
    taus = [(-fit.gamma + root) / (2.0 * fit.delta), (-fit.gamma - root) / (2.0 * fit.delta)]
    taus = [t for t in taus if t >= 0.0]
    if not taus:
        raise NumericalError(f"target angle {theta} not reachable with tau >= 0")
    return min(taus)


# ---------------------------------------------------------------------------
# offline calibration of the prepared state

def expected_measured_zeta_sq(twist_angle: float, kappa: float,
                              noise: NoiseModel, grid_step: int = 3) -> float:
    """Deterministic expectation of the pipeline's second-moment estimate.

    Averages the exact per-N moment (including the clock z rotation) over the
    post-selected atom-number distribution, then adds the biases the
    correction-and-estimation chain carries: the detection-noise subtraction
    uses detected-space sigmas although the quadratic correction amplifies
    them, and the clock trend is removed against the noisy measured total.
    Validated against large Monte Carlo runs at the percent level.
    """
    lo = max(2, int(noise.postselect_lo))
    hi = max(lo + 1, int(noise.postselect_hi))
    ns = np.arange(lo, hi + 1, grid_step, dtype=float)
    if noise.n_sigma > 0:
        w = np.exp(-0.5 * ((ns - noise.n_mean) / noise.n_sigma) ** 2)
    else:
        w = (np.abs(ns - noise.n_mean) < 0.5).astype(float)
        if w.sum() == 0:
            ns = np.array([max(lo, min(hi, round(noise.n_mean)))], dtype=float)
            w = np.ones(1)
    w = w / w.sum()

    contrast = math.cos(twist_angle) ** (int(round(noise.n_mean)) - 1)
    coeff = 0.0
    if noise.clock_slope != 0.0 and math.sin(kappa) != 0.0:
        coeff = noise.clock_slope / (contrast * math.sin(kappa))

    r_mean = np.empty(ns.size)
    second = np.empty(ns.size)
    for i, nf in enumerate(ns):
        n = int(nf)
        state = oat_evolve(coherent_state(n, X_AXIS), OATParams(twist_angle, n))
        zrot = coeff * (n - noise.n_mean)
        if zrot != 0.0:
            state = rotate_z(state, zrot)
        state = rotate(state, RotationPulse(kappa, 0.0))
        amps = state.amplitudes
        m = 0.5 * n - np.arange(n + 1)
        p = np.abs(amps) ** 2
        sz = float(p @ m)
        sz2 = float(p @ (m * m))
        r_mean[i] = 2.0 * sz / n
        second[i] = 4.0 * sz2 / n

    nbar = float(w @ ns)
    dn = ns - nbar
    denom = float(w @ (dn * dn))
    lam = float(w @ (dn * r_mean)) / denom if denom > 0 else 0.0
    resid = r_mean - float(w @ r_mean) - lam * dn
    state_part = float(w @ (second - r_mean * r_mean * ns + resid * resid * ns))

    # detector variances in corrected-count space, at balanced populations
    half = 0.5 * nbar
    amp1 = 1.0 + 2.0 * noise.nu_1 * detector_invert(half, noise.nu_1)
    amp2 = 1.0 + 2.0 * noise.nu_2 * detector_invert(half, noise.nu_2)
    v1 = (noise.det_sigma_1 * amp1) ** 2
    v2 = (noise.det_sigma_2 * amp2) ** 2
    shortfall = (v1 + v2 - noise.det_sigma_1 ** 2 - noise.det_sigma_2 ** 2) / nbar
    phantom = lam * lam * (v1 + v2) * nbar
    cross = -2.0 * lam * (v1 - v2)
    return state_part + shortfall + phantom + cross


def calibrate_twist(n_atoms: int, contrast_target: float) -> float:
    """Twist angle chi*t giving the requested Rabi contrast cos^(N-1)(chi t)."""
    if n_atoms < 2:
        raise ValueError("contrast calibration needs n_atoms >= 2")
    if not 0.0 < contrast_target < 1.0:
        raise ValueError("contrast target must lie in (0, 1)")
    f = lambda c: math.cos(c) ** (n_atoms - 1) - contrast_target
    return brentq(f, 0.0, 1.5, xtol=1e-14)


def calibrate_tilt(state: DickeState, zeta_sq_target: float, branch: str = "outer") -> float:
    """Tilt pulse area kappa with measured second moment zeta_sq_target.

    Two pulse areas reach the same moment, one on each side of the
    minimal-variance angle kappa0; branch "outer" picks the larger |area|
    (beyond kappa0), "inner" the smaller.
    """
    if branch not in ("outer", "inner"):
        raise ValueError("branch must be 'outer' or 'inner'")
    zmin, kappa0 = zeta_sq_min_and_tilt(state)
    if zeta_sq_target < zmin:
        raise ValueError(
            f"zeta_sq target {zeta_sq_target} below the state minimum {zmin:.6f}"
        )
    direction = math.copysign(1.0, kappa0) if kappa0 != 0.0 else 1.0
    far = kappa0 + (direction if branch == "outer" else -direction) * 0.5 * math.pi
    f = lambda k: zeta_sq_at_tilt(state, k) - zeta_sq_target
    if f(far) < 0:
        raise ValueError(f"zeta_sq target {zeta_sq_target} above the state maximum")
    lo, hi = sorted((kappa0, far))
    return brentq(f, lo, hi, xtol=1e-14)


def calibrate_tilt_measured(twist_angle: float, noise: NoiseModel,
                            zeta_sq_target: float, branch: str = "outer") -> float:
    """Tilt pulse area whose EXPECTED MEASURED second moment is the target.

    Same two-branch geometry as calibrate_tilt, but the root is found on the
    expectation of the full estimator (atom-number spread, clock rotation,
    detector biases) instead of the single ideal state, so an emulated run
    reads back the target on average.
    """
    if branch not in ("outer", "inner"):
        raise ValueError("branch must be 'outer' or 'inner'")
    n_ref = max(2, int(round(noise.n_mean)))
    ideal = oat_evolve(coherent_state(n_ref, X_AXIS), OATParams(twist_angle, n_ref))
    _, kappa0 = zeta_sq_min_and_tilt(ideal)
    direction = math.copysign(1.0, kappa0) if kappa0 != 0.0 else 1.0
    far = kappa0 + (direction if branch == "outer" else -direction) * 0.5 * math.pi
    f = lambda k: expected_measured_zeta_sq(twist_angle, k, noise) - zeta_sq_target
    if f(kappa0) > 0:
        raise ValueError(
            f"zeta_sq target {zeta_sq_target} below the expected measurement floor"
        )
    if f(far) < 0:
        raise ValueError(f"zeta_sq target {zeta_sq_target} above the reachable maximum")
    lo, hi = sorted((kappa0, far))
    return brentq(f, lo, hi, xtol=1e-12)


@lru_cache(maxsize=64)
def _calibration_angles(noise: NoiseModel, contrast_target: float,
                        zeta_sq_target: float, branch: str, calibration: str):
    n_ref = max(2, int(round(noise.n_mean)))
    chi = calibrate_twist(n_ref, contrast_target)
    if calibration == "state":
        ideal = oat_evolve(coherent_state(n_ref, X_AXIS), OATParams(chi, n_ref))
        kappa = calibrate_tilt(ideal, zeta_sq_target, branch)
    elif calibration == "measured":
        kappa = calibrate_tilt_measured(chi, noise, zeta_sq_target, branch)
    else:
        raise ValueError("calibration must be 'measured' or 'state'")
    return chi, kappa


def calibrated_preparation(noise: NoiseModel, contrast_target: float = 0.980,
                           zeta_sq_target: float = 0.272, branch: str = "outer",
                           phase_offset: float = 0.0,
                           calibration: str = "measured") -> Preparation:
    """Preparation tuned to the targets at N = round(n_mean).

    calibration "measured" (default) tunes the tilt so the EXPECTED PIPELINE
    READBACK of the second moment equals the target, mirroring how the knob
    is set against the instrument; "state" makes the ideal state itself hit
    the target.  The clock z-rotation coefficient is set so the measured
    ratio trend versus atom number comes out at noise.clock_slope: in the
    squeezing run the trend is coeff * contrast * sin(kappa) per atom.
    """
    chi, kappa = _calibration_angles(
        noise, float(contrast_target), float(zeta_sq_target), branch, calibration)
    coeff = 0.0
    if noise.clock_slope != 0.0:
        coeff = noise.clock_slope / (contrast_target * math.sin(kappa))
    return Preparation(
        twist_angle=chi,
        pulses=(RotationPulse(kappa, 0.0),),
        clock_coeff=coeff,
        phase_offset=phase_offset,
    )
