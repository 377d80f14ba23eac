"""Bell correlation witness, symmetric correlators, and the bound function Z.

The inequality under test is, for the four symmetric correlators,

    2*s0 + s00/2 + s01 + s11/2 + 2N >= 0

for all local-hidden-variable models (lhv module verifies the bound).
Dividing by 2N and expressing the correlators through collective spin
moments gives the witness

    W = -|c_n| + (a.n)^2 * zeta_sq_a + 1 - (a.n)^2,

whose negativity certifies Bell correlations between the spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .dicke import DickeState, SpinAxis, expect_spin, expect_spin_sq

WEIGHT_TOL = 1e-12


def _as_axis(obj) -> SpinAxis:
    if isinstance(obj, SpinAxis):
        return obj
    return SpinAxis(*obj)


@dataclass(frozen=True)
class CorrelatorSet:
    """Symmetric one- and two-body correlators of +-1 outcomes.

    s0 sums single-party means for setting 0; s00, s01, s11 sum the
    i != j pair correlations for the setting pairs (0,0), (0,1), (1,1).
    """

    s0: float
    s00: float
    s01: float
    s11: float
    n_atoms: int

    def __post_init__(self):
        n = self.n_atoms
        if n < 1:
            raise ValueError("n_atoms must be >= 1")
        slack = 1e-7 * max(1.0, n * n)
        if abs(self.s0) > n + slack:
            raise ValueError(f"|s0| = {abs(self.s0)} exceeds N = {n}")
        pair = n * (n - 1)
        for name, val in (("s00", self.s00), ("s11", self.s11)):
            if abs(val) > pair + slack:
                raise ValueError(f"|{name}| = {abs(val)} exceeds N(N-1) = {pair}")
        if abs(self.s01) > n * n + slack:
            raise ValueError(f"|s01| = {abs(self.s01)} exceeds N^2 = {n * n}")

    def to_json_dict(self) -> dict:
        return {
            "s0": self.s0,
            "s00": self.s00,
            "s01": self.s01,
            "s11": self.s11,
            "n_atoms": self.n_atoms,
        }


@dataclass(frozen=True)
class MomentSet:
    """Scaled collective-spin statistics entering the witness."""

    c_n: float
    zeta_sq_a: float
    cos_theta: float
    c_a: float = 0.0
    c_b: float | None = None
    c_c: float | None = None

    def __post_init__(self):
        if self.zeta_sq_a < 0.0:
            raise ValueError("zeta_sq_a must be nonnegative")
        if abs(self.cos_theta) > 1.0 + 1e-9:
            raise ValueError("cos_theta must lie in [-1, 1]")
        for name in ("c_n", "c_a", "c_b", "c_c"):
            val = getattr(self, name)
            if val is not None and abs(val) > 1.0 + 1e-9:
                raise ValueError(f"scaled spin {name} = {val} outside [-1, 1]")

    def to_json_dict(self) -> dict:
        return {
            "c_n": self.c_n,
            "c_a": self.c_a,
            "c_b": self.c_b,
            "c_c": self.c_c,
            "zeta_sq_a": self.zeta_sq_a,
            "cos_theta": self.cos_theta,
        }


@dataclass(frozen=True)
class MixedEnsemble:
    """Weighted mixture of Dicke states; atom numbers may differ per component."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValueError("ensemble needs at least one component")
        for w, s in comps:
            if w < 0.0:
                raise ValueError("weights must be nonnegative")
            if not isinstance(s, DickeState):
                raise ValueError("components must be (weight, DickeState) pairs")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "components", comps)


def m_axis(a, n) -> SpinAxis:
    """Second measurement axis m = 2(a.n)a - n (reflection of -n through a)."""
    a, n = _as_axis(a), _as_axis(n)
    an = a.dot(n)
    return SpinAxis(2 * an * a.x - n.x, 2 * an * a.y - n.y, 2 * an * a.z - n.z)


def _directional_sq(state: DickeState, vec: np.ndarray) -> float:
    """<(v . S)^2> for a not-necessarily-unit vector v; zero vector gives 0."""
    norm = float(np.linalg.norm(vec))
    if norm < 1e-14:
        return 0.0
    u = SpinAxis(*(vec / norm))
    return norm * norm * expect_spin_sq(state, u)


def correlators_from_state(state: DickeState, a, n) -> CorrelatorSet:
    """Correlators of measuring sigma_n (setting 0) and sigma_m (setting 1).

    s01 uses the symmetrized difference-of-squares form
    (S_n + S_m)^2 - (S_n - S_m)^2 = 2 {S_n, S_m}, which avoids building
    non-commuting operator products.
    """
    a, n = _as_axis(a), _as_axis(n)
    m = m_axis(a, n)
    nn = state.n_atoms
    s0 = 2.0 * expect_spin(state, n)
    s00 = 4.0 * expect_spin_sq(state, n) - nn
    s11 = 4.0 * expect_spin_sq(state, m) - nn
    n_arr, m_arr = n.as_array(), m.as_array()
    s01 = (
        _directional_sq(state, n_arr + m_arr)
        - _directional_sq(state, n_arr - m_arr)
        - nn * n.dot(m)
    )
    return CorrelatorSet(s0, s00, s01, s11, nn)


def bell_lhs(c: CorrelatorSet) -> float:
    """Left-hand side of the Bell inequality; negative means Bell-correlated."""
    return 2.0 * c.s0 + 0.5 * c.s00 + c.s01 + 0.5 * c.s11 + 2.0 * c.n_atoms


def witness_value(m: MomentSet) -> float:
    """W = -|c_n| + (a.n)^2 zeta_sq_a + 1 - (a.n)^2; W < 0 is the Bell signature."""
    ct2 = m.cos_theta * m.cos_theta
    return -abs(m.c_n) + ct2 * m.zeta_sq_a + 1.0 - ct2


def moments_from_state(state: DickeState, a, n) -> MomentSet:
    a, n = _as_axis(a), _as_axis(n)
    nn = state.n_atoms
    return MomentSet(
        c_n=2.0 * expect_spin(state, n) / nn,
        zeta_sq_a=4.0 * expect_spin_sq(state, a) / nn,
        cos_theta=a.dot(n),
        c_a=2.0 * expect_spin(state, a) / nn,
    )


def witness_from_state(state, a, n) -> float:
    """Witness of a DickeState or MixedEnsemble for squeezed axis a and probe axis n.

    Mixtures are handled by linearity: each component is evaluated with its
    own atom number and the results are weight-averaged.
    """
    if isinstance(state, MixedEnsemble):
        return math.fsum(
            w * witness_value(moments_from_state(s, a, n)) for w, s in state.components
        )
    return witness_value(moments_from_state(state, a, n))


def witness_curve(state, a, b, theta_grid) -> list:
    """(theta, W) along n(theta) = a cos(theta) + b sin(theta) for orthonormal a, b."""
    a, b = _as_axis(a), _as_axis(b)
    if abs(a.dot(b)) > 1e-10:
        raise ValueError("witness_curve needs an orthogonal a, b frame")
    out = []
    for theta in theta_grid:
        ct, st = math.cos(theta), math.sin(theta)
        n = SpinAxis(
            ct * a.x + st * b.x, ct * a.y + st * b.y, ct * a.z + st * b.z
        )
        out.append((float(theta), witness_from_state(state, a, n)))
    return out


def witness_curve_from_moments(contrast: float, zeta_sq_a: float, theta_grid) -> list:
    """Analytic witness curve for a state described only by its measured moments.

    Assumes the mean spin lies along b (c_a = 0), so c_n(theta) = contrast * sin(theta).
    """
    out = []
    for theta in theta_grid:
        ct = math.cos(theta)
        w = -abs(contrast * math.sin(theta)) + ct * ct * zeta_sq_a + 1.0 - ct * ct
        out.append((float(theta), w))
    return out


# ---------------------------------------------------------------------------
# bound function Z(c_bc, c_a)

def _z_polynomial(c_bc: float, c_a: float) -> Polynomial:
    """Polynomial in Z whose relevant root is the envelope contact value.

    Obtained by eliminating theta from G_Z(theta) = 0 and G_Z'(theta) = 0,
    where G_Z(theta) = Z + (1-Z) sin^2(theta) - c_bc sin(theta) + c_a cos(theta).
    A common cos^2 factor cancels, leaving degree 4.
    """
    u = c_bc * c_bc
    v = c_a * c_a
    z = Polynomial([0.0, 1.0])
    return (
        u**3
        + (v + 4.0 * (1.0 - z)) ** 2 * (v - z**2)
        + u**2 * (3.0 * v + 8.0 * z * (z - 1.0) - 1.0)
        + u
        * (
            3.0 * v**2
            - 2.0 * v * (10.0 * z**2 - 19.0 * z + 10.0)
            + 8.0 * z * (z - 1.0) * (2.0 * z**2 - 2.0 * z - 1.0)
        )
    )


def _envelope_min(z: float, c_bc: float, c_a: float, ngrid: int = 2001) -> float:
    th = np.linspace(0.0, np.pi, ngrid)
    s, c = np.sin(th), np.cos(th)
    g = z + (1.0 - z) * s * s - c_bc * s + c_a * c
    return float(g.min())


def _z_bisect(c_bc: float, c_a: float) -> float:
    # h(Z) = min_theta G_Z is nondecreasing in Z (dG/dZ = cos^2 >= 0);
    # the bound is the Z where h crosses zero.
    lo, hi = 0.0, 1.0
    while _envelope_min(hi, c_bc, c_a) < 0.0:
        hi *= 2.0
        if hi > 64.0:
            raise ValueError("z_bound bisection failed to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _envelope_min(mid, c_bc, c_a) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)


def z_bound(c_bc: float, c_a: float) -> float:
    """Largest Z with zeta_sq_a < Z certifying Bell correlations at the given moments.

    Equals max over theta of [c_bc sin(theta) - c_a cos(theta) - sin^2(theta)]
    / cos^2(theta); even in both arguments. Computed from the eliminant
    polynomial, keeping only roots where the envelope actually touches zero
    (the polynomial also carries spurious branches).
    """
    if c_bc * c_bc + c_a * c_a > 1.0 + 1e-12:
        raise ValueError("(c_bc, c_a) must lie in the closed unit disk")
    cb, ca = abs(c_bc), abs(c_a)
    if ca < 1e-12:
        return (1.0 - math.sqrt(max(0.0, 1.0 - cb * cb))) / 2.0
    poly = _z_polynomial(cb, ca)
    if np.max(np.abs(poly.coef)) >= 1e-13:
        roots = poly.roots()
        real = np.sort(roots[np.abs(roots.imag) < 1e-7].real)[::-1]
        for z in real:
            if abs(_envelope_min(float(z), cb, ca)) < 1e-6:
                return float(z)
    return _z_bisect(cb, ca)


def perpendicular_witness(zeta_sq_a: float, c_b: float) -> float:
    """zeta_sq_a - (1 - sqrt(1 - c_b^2))/2; negative certifies Bell correlations."""
    if abs(c_b) > 1.0:
        raise ValueError("|c_b| must not exceed 1")
    if zeta_sq_a < 0.0:
        raise ValueError("zeta_sq_a must be nonnegative")
    return zeta_sq_a - 0.5 * (1.0 - math.sqrt(1.0 - c_b * c_b))


def wineland_xi_sq(zeta_sq_a: float, c_b: float) -> float:
    """Metrological squeezing parameter bound zeta_sq_a / c_b^2."""
    if c_b == 0.0:
        raise ValueError("wineland_xi_sq is singular at c_b = 0")
    return zeta_sq_a / (c_b * c_b)


# ---------------------------------------------------------------------------
# transverse second-moment ellipse of a state polarized along x

def transverse_moments(state: DickeState) -> tuple:
    """(<S_y^2>, <S_z^2>, <{S_y, S_z}>) without forming operator products.

    The anticommutator comes from the second moment along the diagonal axis
    u = (y+z)/sqrt(2): <{S_y,S_z}> = 2<S_u^2> - <S_y^2> - <S_z^2>.
    """
    vy = expect_spin_sq(state, SpinAxis(0.0, 1.0, 0.0))
    vz = expect_spin_sq(state, SpinAxis(0.0, 0.0, 1.0))
    r = 1.0 / math.sqrt(2.0)
    vu = expect_spin_sq(state, SpinAxis(0.0, r, r))
    return vy, vz, 2.0 * vu - vy - vz


def zeta_sq_at_tilt(state: DickeState, kappa: float) -> float:
    """Scaled second moment 4<S_u^2>/N along u(kappa) = (0, sin kappa, cos kappa)."""
    axis = SpinAxis(0.0, math.sin(kappa), math.cos(kappa))
    return 4.0 * expect_spin_sq(state, axis) / state.n_atoms


def zeta_sq_min_and_tilt(state: DickeState) -> tuple:
    """(min over kappa of zeta_sq_at_tilt, minimizing kappa), via the closed form.

    The moment along u(kappa) is a + b cos(2 kappa) + c sin(2 kappa) with
    a = (Vz+Vy)/2, b = (Vz-Vy)/2, c = anti/2; minimum a - hypot(b, c).
    """
    vy, vz, anti = transverse_moments(state)
    a = 0.5 * (vz + vy)
    b = 0.5 * (vz - vy)
    c = 0.5 * anti
    vmin = a - math.hypot(b, c)
    kappa0 = 0.5 * math.atan2(-c, -b)
    return 4.0 * vmin / state.n_atoms, kappa0
