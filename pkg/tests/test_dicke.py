"""Dicke-basis spin core checked against a full tensor-product simulator."""

import math

import numpy as np
import pytest

import oracles
from bellspin import (
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


def strip_phase(amps: np.ndarray) -> np.ndarray:
    # fix the global phase so the largest amplitude is real nonnegative
    i = int(np.argmax(np.abs(amps)))
    return amps * np.exp(-1j * np.angle(amps[i]))


def random_state(n, rng) -> DickeState:
    return DickeState(n_atoms=n, amplitudes=oracles.random_dicke_amplitudes(n, rng))


class TestCoherentState:
    def test_single_spin_plus_x(self):
        state = coherent_state(1, X_AXIS)
        np.testing.assert_allclose(
            np.abs(state.amplitudes), [1 / math.sqrt(2)] * 2, atol=1e-12)

    def test_two_atoms_plus_z_is_stretched(self):
        state = coherent_state(2, Z_AXIS)
        np.testing.assert_allclose(state.amplitudes, [1.0, 0.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_maximal_polarization(self, n):
        state = coherent_state(n, X_AXIS)
        assert expect_spin(state, X_AXIS) == pytest.approx(n / 2, abs=1e-12)

    def test_rejects_nonpositive_atom_count(self):
        with pytest.raises(ValueError):
            coherent_state(0, Z_AXIS)

    def test_matches_rotated_stretched_state(self, rng):
        # coherent(theta, phi) must equal the rotated m = N/2 basis state
        n = 7
        theta, phi = 1.1, -0.7
        axis = SpinAxis(
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        )
        direct = coherent_state(n, axis)
        full = oracles.dicke_to_full(coherent_state(n, Z_AXIS).amplitudes)
        full = oracles.rotate_full(full, n, theta, phi + math.pi / 2)
        via_rotation = oracles.full_to_dicke(full, n)
        np.testing.assert_allclose(
            strip_phase(np.asarray(direct.amplitudes)),
            strip_phase(via_rotation),
            atol=1e-9,
        )


class TestOatEvolve:
    def test_zero_twist_is_identity(self):
        state = coherent_state(5, X_AXIS)
        evolved = oat_evolve(state, OATParams(twist_angle=0.0, n_atoms=5))
        np.testing.assert_allclose(evolved.amplitudes, state.amplitudes, atol=1e-14)

    def test_two_atom_contrast(self):
        chi_t = 0.37
        state = oat_evolve(coherent_state(2, X_AXIS), OATParams(chi_t, 2))
        assert expect_spin(state, X_AXIS) == pytest.approx(math.cos(chi_t), abs=1e-12)

    def test_eight_atom_contrast(self):
        state = oat_evolve(coherent_state(8, X_AXIS), OATParams(0.1, 8))
        assert expect_spin(state, X_AXIS) == pytest.approx(
            4.0 * math.cos(0.1) ** 7, abs=1e-12)

    def test_atom_number_mismatch(self):
        with pytest.raises(ValueError):
            oat_evolve(coherent_state(3, X_AXIS), OATParams(0.1, 4))


class TestRotate:
    def test_half_spin_y_pulse(self):
        state = rotate(coherent_state(1, Z_AXIS), RotationPulse(math.pi / 2, math.pi / 2))
        np.testing.assert_allclose(
            strip_phase(np.asarray(state.amplitudes)),
            [math.cos(math.pi / 4), math.sin(math.pi / 4)],
            atol=1e-12,
        )

    @pytest.mark.parametrize("n", [1, 2, 5, 8])
    def test_full_turn_phase(self, n, rng):
        state = random_state(n, rng)
        turned = rotate(state, RotationPulse(2 * math.pi, 0.3))
        np.testing.assert_allclose(
            np.asarray(turned.amplitudes),
            (-1) ** n * np.asarray(state.amplitudes),
            atol=1e-9,
        )

    def test_composition(self, rng):
        state = random_state(9, rng)
        alpha, beta, phi = 0.81, -1.27, 2.4
        once = rotate(state, RotationPulse(alpha + beta, phi))
        twice = rotate(rotate(state, RotationPulse(beta, phi)), RotationPulse(alpha, phi))
        np.testing.assert_allclose(
            np.asarray(once.amplitudes), np.asarray(twice.amplitudes), atol=1e-9)

    def test_inverse(self, rng):
        state = random_state(6, rng)
        back = rotate(rotate(state, RotationPulse(0.9, 1.1)), RotationPulse(-0.9, 1.1))
        np.testing.assert_allclose(
            np.asarray(back.amplitudes), np.asarray(state.amplitudes), atol=1e-9)

    def test_rotate_z_adds_azimuth(self):
        # e^{-i beta S_z} moves an equatorial state from azimuth 0 to +beta
        n, beta = 12, 0.6
        turned = rotate_z(coherent_state(n, X_AXIS), beta)
        axis = SpinAxis(math.cos(beta), math.sin(beta), 0.0)
        assert expect_spin(turned, axis) == pytest.approx(n / 2, abs=1e-10)


class TestExpectations:
    def test_stretched_state_moments(self):
        n = 6
        state = coherent_state(n, Z_AXIS)
        assert expect_spin(state, Z_AXIS) == pytest.approx(n / 2, abs=1e-12)
        assert expect_spin(state, X_AXIS) == pytest.approx(0.0, abs=1e-12)
        assert expect_spin_sq(state, X_AXIS) == pytest.approx(n / 4, abs=1e-12)
        assert expect_spin_sq(state, Z_AXIS) == pytest.approx(n * n / 4, abs=1e-12)

    def test_random_state_against_tensor_oracle(self, rng):
        n = 4
        for _ in range(5):
            state = random_state(n, rng)
            full = oracles.dicke_to_full(state.amplitudes)
            for axis in (X_AXIS, Y_AXIS, Z_AXIS, SpinAxis(0.6, 0.0, 0.8)):
                op = oracles.collective_op((axis.x, axis.y, axis.z), n)
                assert expect_spin(state, axis) == pytest.approx(
                    oracles.expect_full(full, op), abs=1e-10)
                assert expect_spin_sq(state, axis) == pytest.approx(
                    oracles.expect_full(full, op @ op), abs=1e-10)


class TestZDistribution:
    def test_stretched(self):
        probs = z_distribution(coherent_state(4, Z_AXIS))
        np.testing.assert_allclose(probs, [1, 0, 0, 0, 0], atol=1e-12)

    def test_equatorial_binomial(self):
        probs = z_distribution(coherent_state(2, X_AXIS))
        np.testing.assert_allclose(probs, [0.25, 0.5, 0.25], atol=1e-12)

    def test_normalized_nonnegative(self, rng):
        probs = z_distribution(random_state(30, rng))
        assert np.all(probs >= 0)
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)


class TestHusimiQ:
    def test_poles(self):
        state = coherent_state(9, Z_AXIS)
        q = husimi_q(state, [(0.0, 0.0), (math.pi, 0.0)])
        assert q[0] == pytest.approx(1.0, abs=1e-12)
        assert q[1] == pytest.approx(0.0, abs=1e-12)

    def test_normalization(self, rng):
        # (N+1)/(4 pi) * integral(Q dOmega) = 1, Gauss-Legendre in cos(theta)
        n = 11
        state = random_state(n, rng)
        nodes, weights = np.polynomial.legendre.leggauss(48)
        thetas = np.arccos(nodes)
        phis = np.linspace(0.0, 2 * math.pi, 96, endpoint=False)
        grid = [(t, p) for t in thetas for p in phis]
        q = np.asarray(husimi_q(state, grid)).reshape(len(thetas), len(phis))
        integral = float(np.sum(weights @ q) * (2 * math.pi / len(phis)))
        assert (n + 1) / (4 * math.pi) * integral == pytest.approx(1.0, abs=1e-8)


class TestInvariants:
    @pytest.mark.parametrize("n", [2, 37, 476, 1000])
    def test_unitarity_large_n(self, n, rng):
        state = random_state(n, rng)
        rotated = rotate(state, RotationPulse(0.734, -1.9))
        twisted = oat_evolve(state, OATParams(0.01, n))
        for out in (rotated, twisted):
            norm = float(np.sum(np.abs(np.asarray(out.amplitudes)) ** 2))
            assert norm == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_rotation_matches_tensor_oracle(self, n, rng):
        state = random_state(n, rng)
        angle, phi = 1.234, 0.456
        ours = rotate(state, RotationPulse(angle, phi))
        full = oracles.rotate_full(oracles.dicke_to_full(state.amplitudes), n, angle, phi)
        np.testing.assert_allclose(
            strip_phase(np.asarray(ours.amplitudes)),
            strip_phase(oracles.full_to_dicke(full, n)),
            atol=1e-9,
        )

    @pytest.mark.parametrize("n", range(2, 11))
    def test_twist_matches_tensor_oracle(self, n, rng):
        state = random_state(n, rng)
        ours = oat_evolve(state, OATParams(0.21, n))
        full = oracles.oat_full(oracles.dicke_to_full(state.amplitudes), n, 0.21)
        np.testing.assert_allclose(
            strip_phase(np.asarray(ours.amplitudes)),
            strip_phase(oracles.full_to_dicke(full, n)),
            atol=1e-9,
        )

    @pytest.mark.parametrize("n", [2, 5, 10, 476])
    def test_contrast_law(self, n):
        chi_t = 0.0085
        state = oat_evolve(coherent_state(n, X_AXIS), OATParams(chi_t, n))
        law = (n / 2) * math.cos(chi_t) ** (n - 1)
        assert expect_spin(state, X_AXIS) == pytest.approx(law, abs=1e-9)


class TestSerialization:
    def test_json_round_trip(self, rng):
        state = random_state(6, rng)
        doc = state.to_json()
        back = DickeState.from_json(doc)
        assert back.n_atoms == state.n_atoms
        np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=0)

    def test_json_layout(self):
        import json

        doc = json.loads(coherent_state(1, Z_AXIS).to_json())
        assert doc == {"n_atoms": 1, "amplitudes": [[1.0, 0.0], [0.0, 0.0]]}
