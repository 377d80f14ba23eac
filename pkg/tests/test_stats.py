"""Moment estimators, overlap integrals, producibility curves, adversary."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from bellspin import (
    AdversaryReport,
    MomentEstimate,
    NoiseModel,
    adversary_from_witnesses,
    adversary_report,
    apply_corrections,
    calibrated_preparation,
    db,
    estimate_moments,
    fit_beta_pm1,
    fit_gamma,
    overlap_probability,
    producibility_bound,
    sample_shot,
    witness_from_state,
)

REF_CB = MomentEstimate(mean=0.980, std_error=0.002, sample_size=120)
REF_ZETA = MomentEstimate(mean=0.272, std_error=0.037, sample_size=190)

QUIET = NoiseModel(
    n_mean=474.0, n_sigma=0.0, det_sigma_1=0.0, det_sigma_2=0.0,
    nu_1=0.0, nu_2=0.0, clock_slope=0.0, postselect_lo=0, postselect_hi=10**6)


class TestMomentEstimate:
    def test_validation(self):
        with pytest.raises(ValueError):
            MomentEstimate(mean=0.0, std_error=-0.1, sample_size=5)
        with pytest.raises(ValueError):
            MomentEstimate(mean=0.0, std_error=0.1, sample_size=0)

    def test_json_dict(self):
        doc = REF_ZETA.to_json_dict()
        assert doc == {"mean": 0.272, "std_error": 0.037, "sample_size": 190}


class TestEstimateMoments:
    def test_constant_samples_definition(self):
        # +-v at constant N with no noise gives zeta^2 = v^2 N exactly
        v, n = 0.03, 400.0
        samples = [(v, n), (-v, n)] * 10
        c_a, zeta = estimate_moments(samples, QUIET)
        assert c_a.mean == pytest.approx(0.0, abs=1e-15)
        assert zeta.mean == pytest.approx(v * v * n, rel=1e-12)

    def test_detection_noise_subtraction(self):
        noise = NoiseModel(det_sigma_1=4.5, det_sigma_2=3.9)
        samples = [(0.02, 474.0), (-0.02, 474.0)] * 5
        _, with_sub = estimate_moments(samples, noise)
        _, without = estimate_moments(samples, noise, subtract_noise=False)
        expected_gap = (4.5**2 + 3.9**2) / 474.0
        assert without.mean - with_sub.mean == pytest.approx(expected_gap, rel=1e-12)

    def test_requires_two_samples(self):
        with pytest.raises(ValueError):
            estimate_moments([(0.1, 400.0)], QUIET)

    def test_jackknife_matches_direct_for_gaussian_samples(self, rng):
        # cross-check the jackknife standard error against the analytic
        # sigma^2 * sqrt(Var of the mean-of-squares) for synthetic data
        n = 474.0
        draws = rng.normal(0.0, 0.025, size=5000)
        samples = [(float(r), n) for r in draws]
        _, zeta = estimate_moments(samples, QUIET)
        x = draws * draws * n
        direct = math.sqrt(np.var(x, ddof=1) / x.size)
        assert zeta.std_error == pytest.approx(direct, rel=0.02)

    def test_unbiased_over_seeded_emulator_runs(self):
        # injected value is the measured-calibration target 0.272
        noise = NoiseModel()
        prep = calibrated_preparation(noise)
        estimates = []
        errors = []
        for seed in range(100):
            records = [sample_shot(prep, noise, rng_seed=seed * 10**6 + i)
                       for i in range(190)]
            _, zeta = estimate_moments(apply_corrections(records, noise), noise)
            estimates.append(zeta.mean)
            errors.append(zeta.std_error)
        combined = np.mean(errors) / math.sqrt(len(estimates))
        assert abs(np.mean(estimates) - 0.272) <= combined


class TestDistributionFits:
    def test_beta_moment_match(self):
        a, b = fit_beta_pm1(0.960, 0.002**2)
        dist = sps.beta(a, b, loc=-1.0, scale=2.0)
        assert dist.mean() == pytest.approx(0.960, abs=1e-10)
        assert dist.var() == pytest.approx(0.002**2, abs=1e-10)

    def test_gamma_moment_match(self):
        k, scale = fit_gamma(0.272, 0.037**2)
        dist = sps.gamma(k, scale=scale)
        assert dist.mean() == pytest.approx(0.272, abs=1e-10)
        assert dist.var() == pytest.approx(0.037**2, abs=1e-10)

    def test_beta_rejects_variance_too_large(self):
        with pytest.raises(ValueError):
            fit_beta_pm1(0.0, 2.0)


class TestOverlapProbability:
    def test_bell_region_reference_point(self):
        p = overlap_probability(REF_CB, REF_ZETA, region="bell")
        assert p == pytest.approx(0.9989, abs=0.0005)

    def test_producibility_regions(self):
        p24 = overlap_probability(REF_CB, REF_ZETA, region="k_producible(24)")
        p29 = overlap_probability(REF_CB, REF_ZETA, region="k_producible(29)")
        assert p24 == pytest.approx(0.010, abs=0.005)
        assert p29 == pytest.approx(0.046, abs=0.015)

    def test_quadrant_normalization(self):
        assert overlap_probability(REF_CB, REF_ZETA, region="all") == pytest.approx(
            1.0, abs=1e-10)

    def test_quadrature_doubling(self):
        base = overlap_probability(REF_CB, REF_ZETA, region="bell", order=400)
        fine = overlap_probability(REF_CB, REF_ZETA, region="bell", order=800)
        assert abs(base - fine) < 1e-4

    def test_unknown_region(self):
        with pytest.raises(ValueError):
            overlap_probability(REF_CB, REF_ZETA, region="k_producible(x)")


class TestProducibilityBound:
    def test_k1_is_unity(self):
        curve = producibility_bound(1, np.linspace(0.0, 0.99, 12))
        assert all(v == pytest.approx(1.0, abs=1e-12) for _, v in curve)

    def test_nonincreasing_in_k(self):
        grid = np.linspace(0.0, 0.98, 15)
        prev = None
        for k in (1, 2, 4, 8, 16, 24, 29):
            values = np.array([v for _, v in producibility_bound(k, grid)])
            if prev is not None:
                assert np.all(values <= prev + 1e-10)
            prev = values

    def test_frozen_reference_contrast_values(self):
        b24 = producibility_bound(24, [0.980])[0][1]
        b29 = producibility_bound(29, [0.980])[0][1]
        assert b24 == pytest.approx(0.38999, abs=1e-4)
        assert b29 == pytest.approx(0.35709, abs=1e-4)

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            producibility_bound(0, [0.5])


class TestAdversary:
    def test_no_adversary_when_w1_nonnegative(self):
        report = adversary_from_witnesses(0.01, 180.0, 200)
        assert report.q_star is None
        assert report.p_star is None
        assert report.m_required is None

    def test_asymptotic_shots_per_atom(self):
        n = 10**6
        report = adversary_from_witnesses(-0.25, 0.38 * n, 200)
        assert report.m_required / n == pytest.approx(4.5535, abs=2e-3)

    def test_report_validation(self):
        with pytest.raises(ValueError):
            AdversaryReport(w1=-0.1, w2=0.4, q_star=1.5, p_star=0.5, m_required=1.0)

    def test_reference_scale_report(self):
        report = adversary_report(476, math.radians(128.0), 200)
        assert report.w1 == pytest.approx(-0.133, abs=0.005)
        assert report.w2 == pytest.approx(180.4, abs=1.0)
        assert report.q_star == pytest.approx(7.381e-4, abs=2e-6)
        assert report.p_star == pytest.approx(0.8627, abs=5e-4)

    def test_ensemble_witness_vanishes_at_qstar(self):
        report, extras = adversary_report(
            476, math.radians(128.0), 200, full_output=True)
        from bellspin import MixedEnsemble

        q = report.q_star
        mix = MixedEnsemble(components=[
            (1.0 - q, extras["squeezed_state"]), (q, extras["product_state"])])
        w = witness_from_state(mix, extras["a_axis"], extras["n_axis"])
        assert abs(w) < 1e-9

    def test_pstar_against_binomial_monte_carlo(self, rng):
        report = adversary_report(476, math.radians(128.0), 200)
        trials = 10**5
        hits = rng.random((trials, 200)) < report.q_star
        p_hat = float(np.mean(~hits.any(axis=1)))
        sigma = math.sqrt(report.p_star * (1 - report.p_star) / trials)
        assert abs(p_hat - report.p_star) <= 3 * sigma

    def test_rejects_tiny_system(self):
        with pytest.raises(ValueError):
            adversary_report(1, math.radians(128.0), 200)


class TestDb:
    def test_values(self):
        assert db(1.0) == 0.0
        assert db(0.2832) == pytest.approx(-5.48, abs=0.01)
        assert db(10.0) == pytest.approx(10.0, abs=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            db(0.0)
        with pytest.raises(ValueError):
            db(-1.0)
