"""Statistical layer: moment estimators with detection-noise subtraction,
the overlap of the measured (contrast, second moment) distribution with
entanglement regions, entanglement-depth bounds, and the finite-statistics
adversary analysis.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import beta as beta_dist
from scipy.stats import gamma as gamma_dist

from .dicke import (
    OATParams,
    RotationPulse,
    SpinAxis,
    X_AXIS,
    Z_AXIS,
    coherent_state,
    oat_evolve,
    rotate,
)
from .witness import witness_from_state, zeta_sq_min_and_tilt


@dataclass(frozen=True)
class MomentEstimate:
    """A sample estimate with its standard error."""

    mean: float
    std_error: float
    sample_size: int

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.sample_size < 1:
            raise ValueError("sample_size must be at least 1")

    def to_json_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "sample_size": self.sample_size,
        }


@dataclass(frozen=True)
class AdversaryReport:
    """Outcome of the two-component adversary model.

    w1 is the witness of the squeezed component, w2 of the all-up product
    component.  q_star is the mixing weight at which the ensemble witness
    crosses zero, p_star the chance that m_total shots all draw the squeezed
    component, and m_required the number of shots needed to push that chance
    below the significance level.  The latter three are None when w1 >= 0
    (no violation to fake).
    """

    w1: float
    w2: float
    q_star: float | None
    p_star: float | None
    m_required: float | None

    def __post_init__(self):
        if self.q_star is not None:
            if self.w1 < 0 < self.w2 and not 0.0 < self.q_star < 1.0:
                raise ValueError("q_star must lie in (0, 1) when w1 < 0 < w2")
        if self.p_star is not None and not 0.0 < self.p_star <= 1.0:
            raise ValueError("p_star must lie in (0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "w1": self.w1,
            "w2": self.w2,
            "q_star": self.q_star,
            "p_star": self.p_star,
            "m_required": self.m_required,
        }


# ---------------------------------------------------------------------------
# moment estimators

def estimate_moments(samples, noise, subtract_noise: bool = True):
    """Estimate (c_a, zeta_sq_a) from corrected (ratio, total N) samples.

    The scaled second moment averages ratio^2 * N and subtracts the detection
    variance (sigma_1^2 + sigma_2^2) / <N>; its standard error is the
    delete-one jackknife (the two means share samples, so error propagation
    through the ratio is handled without a covariance formula).
    """
    if hasattr(samples, "ratios"):
        ratios = np.asarray(samples.ratios, dtype=float)
        totals = np.asarray(samples.n_totals, dtype=float)
    else:
        pairs = [(float(r), float(n)) for r, n in samples]
        ratios = np.array([r for r, _ in pairs])
        totals = np.array([n for _, n in pairs])
    k = ratios.size
    if k < 2:
        raise ValueError("estimate_moments needs at least 2 samples")

    c_a = MomentEstimate(
        mean=float(ratios.mean()),
        std_error=float(ratios.std(ddof=1) / math.sqrt(k)),
        sample_size=k,
    )

    det_var = (noise.det_sigma_1 ** 2 + noise.det_sigma_2 ** 2) if subtract_noise else 0.0
    x = ratios * ratios * totals
    zeta_hat = float(x.mean() - det_var / totals.mean())
    # delete-one jackknife over shots
    loo = (x.sum() - x) / (k - 1) - det_var / ((totals.sum() - totals) / (k - 1))
    se = math.sqrt((k - 1) / k * float(np.sum((loo - loo.mean()) ** 2)))
    zeta_sq = MomentEstimate(mean=zeta_hat, std_error=se, sample_size=k)
    return c_a, zeta_sq


# ---------------------------------------------------------------------------
# moment-matched distributions for the overlap integral

def fit_beta_pm1(mean: float, variance: float):
    """Beta shape parameters on [-1, 1] matching the given mean and variance."""
    if not -1.0 < mean < 1.0:
        raise ValueError("beta mean must lie in (-1, 1)")
    mu = 0.5 * (mean + 1.0)
    v = 0.25 * variance
    common = mu * (1.0 - mu) / v - 1.0
    if common <= 0.0:
        raise ValueError("variance too large for a beta distribution on [-1, 1]")
    return mu * common, (1.0 - mu) * common


def fit_gamma(mean: float, variance: float):
    """Gamma (shape, scale) matching the given mean and variance."""
    if mean <= 0.0 or variance <= 0.0:
        raise ValueError("gamma moment matching needs positive mean and variance")
    return mean * mean / variance, variance / mean


# ---------------------------------------------------------------------------
# k-producibility bounds

def _block_curve(k: int, mu: float):
    """(polarization, scaled variance) of the ground state of J_z^2 - mu J_x for spin k/2."""
    j = 0.5 * k
    m = np.arange(j, -j - 1.0, -1.0)
    cp = np.sqrt((j + m[:-1]) * (j - m[:-1] + 1.0))
    jx = 0.5 * (np.diag(cp, 1) + np.diag(cp, -1))
    h = np.diag(m * m) - mu * jx
    _, vecs = np.linalg.eigh(h)
    g = vecs[:, 0]
    pol = float(g @ (jx @ g)) / j
    var = 4.0 * float(g @ (m * m * g)) / k
    return pol, var


@lru_cache(maxsize=None)
def _single_block_bound(k: int, contrast: float) -> float:
    """Minimal scaled variance of one size-k block at the given polarization."""
    pol0, var0 = _block_curve(k, 1e-9)
    if contrast <= pol0:
        return var0
    f = lambda mu: _block_curve(k, mu)[0] - contrast
    mu = brentq(f, 1e-9, 1e9, xtol=1e-12, rtol=1e-12)
    return _block_curve(k, mu)[1]


def bound_at(k: int, contrast: float) -> float:
    """Minimal zeta_sq_a of a k-producible state at the given polarization.

    Groups hold at most k spins; variance and polarization both add over
    groups, and equal groups of the best single size are optimal, so the
    bound is the lower envelope of the fixed-size curves up to k.  Odd sizes
    carry a variance floor (no m = 0 level), which is why the envelope is
    needed rather than the size-k curve alone.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.0 <= contrast < 1.0:
        raise ValueError("contrast must lie in [0, 1)")
    if k == 1:
        return 1.0
    return min(_single_block_bound(kk, contrast) for kk in range(2, k + 1))


def producibility_bound(k: int, contrast_grid) -> list:
    """Curve of (contrast, zeta_sq_limit) pairs: states below it need (k+1)-particle entanglement."""
    return [(float(c), bound_at(k, float(c))) for c in contrast_grid]


_POL_GRID = np.linspace(0.0, 0.9999995, 2000)


@lru_cache(maxsize=None)
def _size_curve_on_grid(k: int):
    """Fixed-size block curve resampled onto the shared polarization grid."""
    mus = np.geomspace(1e-8, 3e7, 1200)
    pts = np.array([_block_curve(k, float(mu)) for mu in mus])
    order = np.argsort(pts[:, 0])
    pol, var = pts[order, 0], pts[order, 1]
    return np.interp(_POL_GRID, pol, var, right=1.0)


def _k_bound_interpolator(k: int):
    best = np.ones_like(_POL_GRID)
    for kk in range(2, k + 1):
        best = np.minimum(best, _size_curve_on_grid(kk))
    return lambda c: np.interp(np.abs(c), _POL_GRID, best)


# ---------------------------------------------------------------------------
# overlap integral

_K_REGION = re.compile(r"^k_producible\((\d+)\)$|^k(\d+)$")


def _parse_region(region: str):
    if region in ("bell", "all"):
        return region, None
    m = _K_REGION.match(region)
    if m:
        return "k", int(m.group(1) or m.group(2))
    raise ValueError(
        f"unknown region {region!r}; expected 'bell', 'all', or 'k_producible(<k>)'"
    )


def overlap_probability(c_b: MomentEstimate, zeta_sq: MomentEstimate,
                        region: str = "bell", order: int = 400) -> float:
    """Probability mass of the measured point inside the named region.

    The contrast estimate is modeled as a beta distribution on [-1, 1] and the
    second moment as an independent gamma, both moment-matched.  Region "bell"
    is zeta_sq below (1 - sqrt(1 - c^2))/2; a k region is zeta_sq above the
    (contrast-squared scaled) k-producibility curve, i.e. compatibility with
    k-producible states; "all" is the whole quadrant.
    """
    kind, k = _parse_region(region)
    a_par, b_par = fit_beta_pm1(c_b.mean, c_b.std_error ** 2)
    shape, scale = fit_gamma(zeta_sq.mean, zeta_sq.std_error ** 2)

    sd = c_b.std_error
    lo = max(-1.0, c_b.mean - 15.0 * sd)
    hi = min(1.0, c_b.mean + 15.0 * sd)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    c = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * weights
    pdf = beta_dist.pdf(0.5 * (c + 1.0), a_par, b_par) * 0.5

    if kind == "all":
        inner = np.ones_like(c)
    elif kind == "bell":
        zb = 0.5 * (1.0 - np.sqrt(np.maximum(0.0, 1.0 - c * c)))
        inner = gamma_dist.cdf(zb, shape, scale=scale)
    else:
        bound = _k_bound_interpolator(k)
        inner = 1.0 - gamma_dist.cdf(c * c * bound(c), shape, scale=scale)
    return float(np.sum(w * pdf * inner))


# ---------------------------------------------------------------------------
# finite-statistics adversary

def adversary_from_witnesses(w1: float, w2: float, m_total: int,
                             alpha: float = 0.05) -> AdversaryReport:
    """Adversary report from already-known component witnesses."""
    if w1 >= 0.0 or w2 <= 0.0:
        return AdversaryReport(w1=w1, w2=w2, q_star=None, p_star=None, m_required=None)
    q_star = -w1 / (w2 - w1)
    return AdversaryReport(
        w1=w1,
        w2=w2,
        q_star=q_star,
        p_star=(1.0 - q_star) ** m_total,
        m_required=math.log(alpha) / math.log(1.0 - q_star),
    )


def _squeezed_witness_bound(chi: float, n_atoms: int, theta: float) -> float:
    """Witness of the twisted state at its optimal analysis tilt, closed form."""
    contrast = math.cos(chi) ** (n_atoms - 1)
    state = oat_evolve(coherent_state(n_atoms, X_AXIS), OATParams(chi, n_atoms))
    zmin, _ = zeta_sq_min_and_tilt(state)
    cth = math.cos(theta)
    return -abs(math.sin(theta)) * contrast + cth * cth * zmin + 1.0 - cth * cth


def adversary_report(n_atoms: int, theta: float, m_total: int,
                     alpha: float = 0.05, full_output: bool = False):
    """Optimize the squeezed component at the given analysis angle and report
    the mixing weight q*, survival chance p*, and shot budget of the adversary.

    The squeezed component is a twisted coherent state rotated to its
    minimal-variance tilt; the twist angle is optimized numerically.  The
    product component is every atom up.  Both witnesses are evaluated on the
    actual states, so the q* ensemble has witness exactly zero.
    """
    if n_atoms < 2:
        raise ValueError("adversary_report needs n_atoms >= 2")
    res = minimize_scalar(
        _squeezed_witness_bound,
        bounds=(1e-4, 0.08),
        args=(n_atoms, theta),
        method="bounded",
        options={"xatol": 1e-12},
    )
    chi = float(res.x)
    squeezed = oat_evolve(coherent_state(n_atoms, X_AXIS), OATParams(chi, n_atoms))
    _, kappa = zeta_sq_min_and_tilt(squeezed)
    squeezed = rotate(squeezed, RotationPulse(kappa, 0.0))
    product = coherent_state(n_atoms, Z_AXIS)
    a = Z_AXIS
    n_axis = SpinAxis(math.sin(theta), 0.0, math.cos(theta))
    w1 = witness_from_state(squeezed, a, n_axis)
    w2 = witness_from_state(product, a, n_axis)
    report = adversary_from_witnesses(w1, w2, m_total, alpha=alpha)
    if not full_output:
        return report
    return report, {
        "twist_angle": chi,
        "tilt_angle": kappa,
        "squeezed_state": squeezed,
        "product_state": product,
        "a_axis": a,
        "n_axis": n_axis,
    }


def db(x: float) -> float:
    """Decibel form 10 log10(x) of a variance ratio."""
    if x <= 0:
        raise ValueError("db is defined for positive arguments")
    return 10.0 * math.log10(x)
