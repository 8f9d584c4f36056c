import numpy as np
import pytest

from conftest import synthetic_stream
from okl.baselines import (FOGDLearner, FourierFeatureMap, KernelOGDLearner,
                           NOGDLearner, NystromMap, baseline_stepsize_grid)
from okl.kernels import GaussianKernel


class TestStepsizeGrid:
    def test_grid_values(self):
        grid = baseline_stepsize_grid(100)
        np.testing.assert_allclose(grid, 10.0 ** np.arange(-3, 4) / 10.0)


class TestKernelOGD:
    def test_first_round_grows_support(self, rng):
        learner = KernelOGDLearner(GaussianKernel(1.0), eta=0.2)
        out = learner.step(rng.normal(size=3), 1)
        assert out.prediction == 1 and out.hinge_loss == 1.0
        assert learner.support_size == 1

    def test_zero_loss_round_keeps_support(self):
        learner = KernelOGDLearner(GaussianKernel(1.0), eta=2.0)
        x = np.array([0.1, 0.2])
        learner.step(x, 1)
        out = learner.step(x, 1)   # margin = 2 >= 1
        assert out.hinge_loss == 0.0
        assert learner.support_size == 1

    def test_support_grows_at_most_one_per_round(self):
        stream = synthetic_stream(21, n=150, dim=3, separation=0.5)
        learner = KernelOGDLearner(GaussianKernel(1.0), eta=0.3)
        for i in range(len(stream)):
            before = learner.support_size
            out = learner.step(stream.features[i], int(stream.labels[i]))
            assert learner.support_size - before == (1 if out.updated else 0)

    def test_beats_zero_hypothesis(self):
        # oracle: the zero hypothesis suffers hinge loss exactly T
        stream = synthetic_stream(22, n=200, dim=4, separation=1.0)
        learner = KernelOGDLearner(GaussianKernel(1.0),
                                   eta=1.0 / np.sqrt(len(stream)))
        for i in range(len(stream)):
            learner.step(stream.features[i], int(stream.labels[i]))
        assert learner.cumulative_loss <= len(stream)

    def test_norm_stays_in_ball(self):
        stream = synthetic_stream(23, n=200, dim=3, separation=0.0)
        learner = KernelOGDLearner(GaussianKernel(1.0), eta=2.0, radius=3.0)
        for i in range(len(stream)):
            learner.step(stream.features[i], int(stream.labels[i]))
        pts = learner._support()
        coeffs = learner._coeffs[: learner.support_size]
        dense = coeffs @ learner.kernel.gram(pts) @ coeffs
        assert np.sqrt(dense) <= 3.0 + 1e-6


class TestFourierFeatures:
    def test_prediction_from_zero_weights(self, rng):
        fmap = FourierFeatureMap(64, 3, sigma=1.0, seed=0)
        learner = FOGDLearner(fmap, eta=0.1)
        out = learner.step(rng.normal(size=3), -1)
        assert out.prediction == 1 and out.hinge_loss == 1.0

    def test_feature_norm_bounded(self, rng):
        fmap = FourierFeatureMap(32, 4, sigma=0.7, seed=1)
        for _ in range(50):
            z = fmap.transform(rng.normal(size=4))
            assert z @ z <= 2.0 + 1e-12
            assert np.max(np.abs(z)) <= np.sqrt(2.0 / 32) + 1e-12

    def test_montecarlo_kernel_approximation(self, rng):
        # oracle: exact Gaussian kernel on 1000 random pairs
        sigma = 1.5
        fmap = FourierFeatureMap(4096, 5, sigma=sigma, seed=2)
        kernel = GaussianKernel(sigma)
        errs = []
        for _ in range(1000):
            x = rng.normal(size=5)
            v = rng.normal(size=5)
            errs.append(abs(fmap.transform(x) @ fmap.transform(v) - kernel(x, v)))
        assert np.mean(errs) <= 0.05

    def test_seeded_determinism(self):
        a = FourierFeatureMap(16, 3, sigma=1.0, seed=9)
        b = FourierFeatureMap(16, 3, sigma=1.0, seed=9)
        assert np.array_equal(a.frequencies, b.frequencies)
        assert np.array_equal(a.phases, b.phases)

    def test_error_decreases_with_doubling(self, rng):
        # statistical: mean abs error shrinks as the feature count doubles
        sigma = 1.0
        kernel = GaussianKernel(sigma)
        pairs = [(rng.normal(size=4), rng.normal(size=4)) for _ in range(400)]
        means = []
        for num in (256, 1024, 4096):
            errs = []
            for seed in range(3):
                fmap = FourierFeatureMap(num, 4, sigma=sigma, seed=seed)
                errs.extend(abs(fmap.transform(x) @ fmap.transform(v) - kernel(x, v))
                            for x, v in pairs)
            means.append(np.mean(errs))
        assert means[0] > means[1] > means[2]

    def test_dimension_mismatch(self):
        fmap = FourierFeatureMap(8, 3, sigma=1.0, seed=0)
        with pytest.raises(ValueError, match="dimension"):
            fmap.transform(np.zeros(4))


class TestNystrom:
    def test_full_rank_exact_on_landmarks(self, rng):
        kernel = GaussianKernel(1.0)
        landmarks = rng.normal(size=(12, 3))
        nmap = NystromMap(kernel, landmarks, rank=12)
        Z = nmap.transform(landmarks)
        K = kernel.gram(landmarks)
        assert np.max(np.abs(Z @ Z.T - K)) <= 1e-8

    def test_self_similarity_matches_nystrom_approximation(self, rng):
        kernel = GaussianKernel(1.0)
        landmarks = rng.normal(size=(10, 3))
        nmap = NystromMap(kernel, landmarks, rank=4)
        x = landmarks[3]
        z = nmap.transform(x)
        # oracle: k_B(x)^T V_k diag(1/vals) V_k^T k_B(x)
        K = kernel.gram(landmarks) + 1e-10 * np.eye(10)
        vals, vecs = np.linalg.eigh(K)
        vals, vecs = vals[::-1][:4], vecs[:, ::-1][:, :4]
        k_b = kernel.cross(landmarks, x)
        approx = k_b @ vecs @ np.diag(1.0 / vals) @ vecs.T @ k_b
        assert z @ z == pytest.approx(approx, abs=1e-8)

    def test_collection_phase_behaves_like_ogd(self):
        stream = synthetic_stream(24, n=60, dim=3, separation=0.5)
        kernel = GaussianKernel(1.0)
        eta = 0.3
        nogd = NOGDLearner(kernel, budget=80, eta=eta)   # never fills
        ogd = KernelOGDLearner(kernel, eta=eta)
        for i in range(len(stream)):
            a = nogd.step(stream.features[i], int(stream.labels[i]))
            b = ogd.step(stream.features[i], int(stream.labels[i]))
            assert a.prediction == b.prediction
            assert a.hinge_loss == pytest.approx(b.hinge_loss, abs=1e-12)

    def test_conversion_preserves_hypothesis_values(self):
        stream = synthetic_stream(25, n=50, dim=3, separation=0.5)
        kernel = GaussianKernel(1.0)
        nogd = NOGDLearner(kernel, budget=40, eta=0.3, rank_fraction=1.0)
        values_before = None
        for i in range(40):
            nogd.step(stream.features[i], int(stream.labels[i]))
            if i == 38:
                values_before = nogd.decision_function(stream.features[40:])
        after = nogd.decision_function(stream.features[40:])
        # last collection round may update, so replay its effect via OGD twin
        ogd = KernelOGDLearner(kernel, eta=0.3)
        for i in range(40):
            ogd.step(stream.features[i], int(stream.labels[i]))
        expected = ogd.decision_function(stream.features[40:])
        np.testing.assert_allclose(after, expected, atol=1e-6)
        assert values_before is not None

    def test_predictions_in_labels(self):
        stream = synthetic_stream(26, n=120, dim=3, separation=0.3)
        learners = [
            KernelOGDLearner(GaussianKernel(1.0), eta=0.2),
            FOGDLearner(FourierFeatureMap(64, 3, 1.0, seed=3), eta=0.2),
            NOGDLearner(GaussianKernel(1.0), budget=30, eta=0.2),
        ]
        for learner in learners:
            for i in range(len(stream)):
                out = learner.step(stream.features[i], int(stream.labels[i]))
                assert out.prediction in (-1, 1)

    def test_rank_validation(self, rng):
        with pytest.raises(ValueError, match="rank"):
            NystromMap(GaussianKernel(1.0), rng.normal(size=(5, 2)), rank=6)
