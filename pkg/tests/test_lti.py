"""Tests for the difference-equation identification layer."""

import numpy as np
import pytest

from hankelflow.driver import SolveParams
from hankelflow.exceptions import InvalidModelError, ShapeError
from hankelflow.hankel import HankelShape, build_hankel
from hankelflow.lti import (
    LtiModel,
    add_noise,
    identify,
    model_residual,
    normalize_coefficients,
    random_stable_model,
    simulate_lti,
)


def coefficient_angle(R, R_hat) -> float:
    """Angle between coefficient directions (sign-insensitive)."""
    a = normalize_coefficients(R)
    b = normalize_coefficients(R_hat)
    c = min(1.0, abs(float(a @ b)))
    return float(np.arccos(c))


class TestNormalize:
    def test_unit_norm_and_sign(self):
        R = normalize_coefficients([2.0, 0.0, -4.0])
        assert np.linalg.norm(R) == pytest.approx(1.0)
        assert R[-1] > 0
        assert R == pytest.approx(np.array([-1.0, 0.0, 2.0]) / np.sqrt(5))

    def test_trailing_zero_sign_uses_last_nonzero(self):
        R = normalize_coefficients([0.0, -3.0, 0.0])
        assert R[1] > 0

    def test_zero_vector_rejected(self):
        with pytest.raises(InvalidModelError):
            normalize_coefficients([0.0, 0.0])

    def test_model_stores_normalized(self):
        model = LtiModel(R=[1.0, 1.0, -1.0])
        assert np.linalg.norm(model.R) == pytest.approx(1.0)
        assert model.order == 2


class TestSimulate:
    def test_constant_sequence(self):
        p = simulate_lti([1.0, -1.0], [3.0], 6)
        assert p == pytest.approx(np.full(6, 3.0))

    def test_fibonacci(self):
        # p(t+2) = p(t+1) + p(t)  <=>  R = (1, 1, -1).
        p = simulate_lti([1.0, 1.0, -1.0], [1.0, 1.0], 10)
        assert p == pytest.approx([1, 1, 2, 3, 5, 8, 13, 21, 34, 55])

    def test_accepts_model_instance(self):
        model = LtiModel(R=[1.0, -1.0])
        p = simulate_lti(model, [2.0], 4)
        assert p == pytest.approx(np.full(4, 2.0))

    def test_zero_leading_coefficient_rejected(self):
        with pytest.raises(InvalidModelError):
            simulate_lti([1.0, 1.0, 0.0], [1.0, 1.0], 5)

    def test_too_short_trajectory_rejected(self):
        with pytest.raises(ShapeError):
            simulate_lti([1.0, 1.0, -1.0], [1.0, 1.0], 2)

    def test_exact_trajectory_has_rank_deficient_hankel(self):
        for seed in range(5):
            order = 2 + seed % 3
            model = random_stable_model(order, seed=seed)
            p = simulate_lti(model, np.ones(order), 6 * order)
            H = build_hankel(p, HankelShape.from_length(len(p), order + 1))
            sig = np.linalg.svd(H, compute_uv=False)
            assert sig[-1] <= 1e-10 * np.linalg.norm(H)


class TestRandomStableModel:
    def test_deterministic_per_seed(self):
        a = random_stable_model(4, seed=11)
        b = random_stable_model(4, seed=11)
        assert a.R == pytest.approx(b.R)

    @pytest.mark.parametrize("order", [1, 2, 3, 5, 6])
    def test_roots_in_annulus(self, order):
        model = random_stable_model(order, seed=order)
        roots = np.roots(model.R[::-1])
        mags = np.abs(roots)
        assert len(roots) == order
        assert np.all(mags >= 0.5 - 1e-9)
        assert np.all(mags <= 0.95 + 1e-9)

    def test_coefficients_are_real(self):
        model = random_stable_model(7, seed=2)
        assert np.isrealobj(model.R)

    def test_order_zero_rejected(self):
        with pytest.raises(InvalidModelError):
            random_stable_model(0, seed=0)


class TestAddNoise:
    def test_exact_relative_norm(self):
        rng = np.random.default_rng(20)
        for seed in range(5):
            p0 = rng.standard_normal(15)
            for tau in (1e-3, 1e-2, 0.5):
                p = add_noise(p0, tau, seed=seed)
                assert np.linalg.norm(p - p0) == pytest.approx(tau * np.linalg.norm(p0))

    def test_zero_noise_is_copy(self):
        p0 = np.arange(5.0)
        p = add_noise(p0, 0.0, seed=1)
        assert p is not p0
        assert p == pytest.approx(p0)

    def test_deterministic_per_seed(self):
        p0 = np.arange(1.0, 9.0)
        assert add_noise(p0, 0.1, seed=4) == pytest.approx(add_noise(p0, 0.1, seed=4))

    def test_complex_data(self):
        p0 = np.arange(1.0, 7.0) + 1j * np.arange(6.0)
        p = add_noise(p0, 0.2, seed=5)
        assert np.iscomplexobj(p)
        assert np.linalg.norm(p - p0) == pytest.approx(0.2 * np.linalg.norm(p0))

    def test_negative_level_rejected(self):
        with pytest.raises(ValueError):
            add_noise(np.ones(4), -0.1, seed=0)


class TestIdentify:
    def test_order_one_geometric_decay(self):
        # p(t) = 0.9^t satisfies 0.9 p(t) - p(t+1) = 0.
        p = 0.9 ** np.arange(12)
        model, solution = identify(p, 1)
        assert solution.epsilon_star <= 1e-8 * np.linalg.norm(p)
        assert coefficient_angle(model.R, [-0.9, 1.0]) <= 1e-6

    def test_exact_recovery_random_models(self):
        for seed in range(4):
            order = 2 + seed % 2
            truth = random_stable_model(order, seed=100 + seed)
            p = simulate_lti(truth, np.ones(order), 10 * order)
            model, solution = identify(p, order)
            assert solution.converged
            assert coefficient_angle(model.R, truth.R) <= 1e-6

    def test_noisy_recovery_close_to_truth(self):
        truth = random_stable_model(2, seed=31)
        p0 = simulate_lti(truth, [1.0, 0.5], 24)
        p = add_noise(p0, 1e-4, seed=31)
        params = SolveParams(epsilon0=1e-5, delta_increment=1e-5)
        model, solution = identify(p, 2, params=params)
        assert solution.converged
        assert coefficient_angle(model.R, truth.R) <= 1e-2
        # The corrected trajectory cannot be farther than the noise itself.
        assert solution.distance <= np.linalg.norm(p - p0) * (1 + 1e-6)

    def test_short_data_rejected(self):
        with pytest.raises(ShapeError):
            identify(np.ones(5), 2)


class TestModelResidual:
    def test_zero_on_exact_data(self):
        truth = random_stable_model(3, seed=8)
        p = simulate_lti(truth, np.ones(3), 20)
        assert model_residual(truth, p) <= 1e-10 * np.linalg.norm(p)

    def test_positive_on_noisy_data(self):
        truth = random_stable_model(3, seed=9)
        p = add_noise(simulate_lti(truth, np.ones(3), 20), 1e-2, seed=9)
        assert model_residual(truth, p) > 0
