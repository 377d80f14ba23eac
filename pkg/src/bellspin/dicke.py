"""Collective spin states of N spin-1/2 particles in the Dicke basis.

A pure permutation-symmetric state lives in the N+1 dimensional maximal
angular momentum sector j = N/2. Amplitude index k corresponds to the
S_z eigenvalue m = N/2 - k, so index 0 is the all-up stretched state.

All state types are immutable; every operation returns a new state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .wigner import pi_half_matrix

NORM_TOL = 1e-10
AXIS_TOL = 1e-12


def m_values(n_atoms: int) -> np.ndarray:
    """S_z eigenvalues (N/2, N/2-1, ..., -N/2) in amplitude index order."""
    return 0.5 * n_atoms - np.arange(n_atoms + 1)


@dataclass(frozen=True)
class SpinAxis:
    """Unit 3-vector labelling a collective spin direction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(norm - 1.0) > AXIS_TOL:
            raise ValueError(f"spin axis must be unit length, got norm {norm!r}")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "SpinAxis":
        norm = math.sqrt(x * x + y * y + z * z)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(x / norm, y / norm, z / norm)

    @classmethod
    def from_polar(cls, theta: float, phi: float) -> "SpinAxis":
        return cls.normalized(
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "SpinAxis") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def __neg__(self) -> "SpinAxis":
        return SpinAxis(-self.x, -self.y, -self.z)


X_AXIS = SpinAxis(1.0, 0.0, 0.0)
Y_AXIS = SpinAxis(0.0, 1.0, 0.0)
Z_AXIS = SpinAxis(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class RotationPulse:
    """Rotation exp(-i angle S_phi) about the equatorial axis {cos phi, sin phi, 0}."""

    angle: float
    axis_phase: float

    def __post_init__(self):
        if not math.isfinite(self.angle):
            raise ValueError("pulse angle must be finite")
        object.__setattr__(self, "axis_phase", self.axis_phase % (2.0 * math.pi))


@dataclass(frozen=True)
class OATParams:
    """One-axis-twisting evolution exp(-i twist_angle S_z^2) for a given N."""

    twist_angle: float
    n_atoms: int

    def __post_init__(self):
        if not math.isfinite(self.twist_angle):
            raise ValueError("twist_angle must be finite")


@dataclass(frozen=True)
class DickeState:
    n_atoms: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.n_atoms + 1,):
            raise ValueError(
                f"need {self.n_atoms + 1} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} outside tolerance {NORM_TOL}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def to_json_dict(self) -> dict:
        return {
            "n_atoms": self.n_atoms,
            "amplitudes": [[float(c.real), float(c.imag)] for c in self.amplitudes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "DickeState":
        amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
        return cls(int(doc["n_atoms"]), amps)

    @classmethod
    def from_json(cls, text: str) -> "DickeState":
        return cls.from_json_dict(json.loads(text))


def _log_binomial_half(n_atoms: int) -> np.ndarray:
    k = np.arange(n_atoms + 1)
    return 0.5 * (gammaln(n_atoms + 1) - gammaln(k + 1) - gammaln(n_atoms - k + 1))


def _coherent_amplitudes(n_atoms: int, theta: float, phi: float) -> np.ndarray:
    """Amplitudes of the coherent state at polar angles (theta, phi).

    c_k = sqrt(C(N,k)) cos^(N-k)(theta/2) sin^k(theta/2) exp(i k phi),
    assembled in log space so the binomials survive N ~ 500. The poles
    theta = 0, pi make one of the log factors -inf; masked explicitly.
    """
    k = np.arange(n_atoms + 1)
    half = 0.5 * theta
    c, s = math.cos(half), math.sin(half)
    logmag = _log_binomial_half(n_atoms)
    if c > 0.0:
        logmag = logmag + (n_atoms - k) * math.log(c)
    else:
        logmag = np.where(k == n_atoms, logmag, -np.inf)
    if s > 0.0:
        logmag = logmag + k * math.log(s)
    else:
        logmag = np.where(k == 0, logmag, -np.inf)
    amps = np.exp(logmag) * np.exp(1j * phi * k)
    return amps / np.linalg.norm(amps)


def coherent_state(n_atoms: int, axis: SpinAxis) -> DickeState:
    """Spin-N/2 coherent state polarized along axis."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    z = min(1.0, max(-1.0, axis.z))
    theta = math.acos(z)
    phi = math.atan2(axis.y, axis.x)
    return DickeState(n_atoms, _coherent_amplitudes(n_atoms, theta, phi))


def oat_evolve(state: DickeState, params: OATParams) -> DickeState:
    """Apply exp(-i twist_angle S_z^2): phase exp(-i chi t m^2) on each amplitude."""
    if params.n_atoms != state.n_atoms:
        raise ValueError(
            f"OATParams for N={params.n_atoms} applied to N={state.n_atoms} state"
        )
    m = m_values(state.n_atoms)
    return DickeState(
        state.n_atoms, np.exp(-1j * params.twist_angle * m * m) * state.amplitudes
    )


def rotate(state: DickeState, pulse: RotationPulse) -> DickeState:
    """Apply exp(-i angle S_phi) with S_phi = cos(phi) S_x + sin(phi) S_y.

    Evaluated as z-phases conjugated by the pi/2 frame change: the d(pi/2)
    matrix maps the rotation axis onto z, where the rotation is diagonal.
    """
    n = state.n_atoms
    m = m_values(n)
    delta = pi_half_matrix(n)
    u = np.exp(1j * pulse.axis_phase * m) * state.amplitudes
    u = delta @ u
    u = np.exp(1j * pulse.angle * m) * u
    u = delta.T @ u
    return DickeState(n, np.exp(-1j * pulse.axis_phase * m) * u)


def rotate_z(state: DickeState, angle: float) -> DickeState:
    """Apply exp(-i angle S_z), diagonal in the Dicke basis."""
    m = m_values(state.n_atoms)
    return DickeState(state.n_atoms, np.exp(-1j * angle * m) * state.amplitudes)


def _apply_axis(amps: np.ndarray, n_atoms: int, axis: SpinAxis) -> np.ndarray:
    """Vector S_axis |psi> via the ladder decomposition.

    S_axis = a_z S_z + (a_x - i a_y)/2 S_+ + (a_x + i a_y)/2 S_-.
    """
    j = 0.5 * n_atoms
    m = m_values(n_atoms)
    out = axis.z * (m * amps)
    if axis.x != 0.0 or axis.y != 0.0:
        sp = np.zeros_like(amps)
        cp = np.sqrt((j - m) * (j + m + 1))
        sp[:-1] = cp[1:] * amps[1:]          # S+ lowers the index
        sm = np.zeros_like(amps)
        cm = np.sqrt((j + m) * (j - m + 1))
        sm[1:] = cm[:-1] * amps[:-1]         # S- raises the index
        out = out + 0.5 * (axis.x - 1j * axis.y) * sp + 0.5 * (axis.x + 1j * axis.y) * sm
    return out


def expect_spin(state: DickeState, axis: SpinAxis) -> float:
    """<S_axis>, in [-N/2, N/2]."""
    return float(np.real(np.vdot(state.amplitudes, _apply_axis(state.amplitudes, state.n_atoms, axis))))


def expect_spin_sq(state: DickeState, axis: SpinAxis) -> float:
    """<S_axis^2>, in [0, N^2/4]. S_axis is Hermitian, so this is |S_axis psi|^2."""
    w = _apply_axis(state.amplitudes, state.n_atoms, axis)
    return float(np.real(np.vdot(w, w)))


def z_distribution(state: DickeState) -> np.ndarray:
    """Probabilities |c_m|^2 of a projective S_z measurement, index order of m_values."""
    return np.abs(state.amplitudes) ** 2


def husimi_q(state: DickeState, polar_grid) -> np.ndarray:
    """Husimi function Q(theta, phi) = |<coherent(theta, phi)|state>|^2.

    polar_grid is an iterable of (theta, phi) pairs; returns one value in
    [0, 1] per grid point. Normalization: (N+1)/(4 pi) * integral Q dOmega = 1.
    """
    grid = np.atleast_2d(np.asarray(list(polar_grid), dtype=float))
    if grid.size == 0:
        raise ValueError("polar_grid must be nonempty")
    if grid.shape[1] != 2:
        raise ValueError("polar_grid entries must be (theta, phi) pairs")
    out = np.empty(grid.shape[0])
    for i, (theta, phi) in enumerate(grid):
        coh = _coherent_amplitudes(state.n_atoms, theta, phi)
        out[i] = abs(np.vdot(coh, state.amplitudes)) ** 2
    return out
