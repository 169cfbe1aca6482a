import numpy as np
import pytest

from dassim import (
    DiscreteModel,
    GaussianState,
    ObservationModel,
    discretize,
    enkf_update,
    ensemble_covariance,
    ensemble_mean,
    forecast_ensemble,
    generate_observations,
    init_ensemble,
    kalman_gain,
    perturb_observation,
    predict,
    rng_stream,
    run_enkf,
    simulate_truth,
    spring_mass_default,
    update,
)

P0_BENCH = 0.05 * np.eye(2)
H_BENCH = np.array([[1.0, 0.0]])
R_BENCH = np.array([[0.01]])

# non-diagonal prior so every gain entry is away from zero
P_FULL = np.array([[0.05, 0.02], [0.02, 0.04]])


def identity_model(n=2, Q=None):
    return DiscreteModel(
        Ad=np.eye(n),
        Bd=np.zeros((n, n)),
        Q=np.zeros((n, n)) if Q is None else Q,
        dt=1.0,
        forcing=lambda t: np.zeros(n),
    )


def mean_oracle(ensemble):
    # independent two-pass accumulation
    acc = np.zeros(ensemble.shape[1])
    for member in ensemble:
        acc = acc + member
    return acc / ensemble.shape[0]


class TestInitEnsemble:
    def test_zero_spread(self):
        ensemble = init_ensemble(np.array([1.0, 2.0]), np.zeros((2, 2)), 5, rng_stream(0))
        assert np.array_equal(ensemble, np.tile([1.0, 2.0], (5, 1)))

    def test_sample_covariance_near_target(self):
        ensemble = init_ensemble(np.zeros(2), P0_BENCH, 100, rng_stream(12))
        sample = ensemble_covariance(ensemble)
        assert np.abs(np.diag(sample) / np.diag(P0_BENCH) - 1.0).max() < 0.3
        assert abs(sample[0, 1]) < 0.3 * 0.05

    def test_deterministic_given_seed(self):
        draw = lambda: init_ensemble(np.zeros(2), P0_BENCH, 10, rng_stream(5))
        assert np.array_equal(draw(), draw())

    def test_too_few_members(self):
        with pytest.raises(ValueError, match=">= 2"):
            init_ensemble(np.zeros(2), P0_BENCH, 1, rng_stream(0))


class TestEnsembleStatistics:
    def test_mean_of_identical_members(self):
        v = np.array([3.0, -1.0])
        assert np.array_equal(ensemble_mean(np.tile(v, (7, 1))), v)

    def test_mean_hand_sum(self):
        assert np.array_equal(ensemble_mean(np.array([[0.0], [2.0]])), [1.0])

    def test_mean_matches_accumulation_oracle(self):
        ensemble = rng_stream(21).standard_normal((11, 3))
        assert np.allclose(ensemble_mean(ensemble), mean_oracle(ensemble), atol=1e-13)

    def test_covariance_of_identical_members(self):
        assert np.abs(ensemble_covariance(np.tile([1.0, 2.0], (4, 1)))).max() == 0.0

    def test_covariance_hand_value(self):
        assert np.array_equal(ensemble_covariance(np.array([[0.0], [2.0]])), [[2.0]])

    def test_covariance_statistical(self):
        q = 0.0005 * np.eye(2)
        ensemble = init_ensemble(np.zeros(2), q, 100_000, rng_stream(33))
        sample = ensemble_covariance(ensemble)
        assert np.abs(np.diag(sample) / np.diag(q) - 1.0).max() < 0.05
        assert abs(sample[0, 1]) < 0.05 * 0.0005

    def test_covariance_needs_two_members(self):
        with pytest.raises(ValueError, match=">= 2"):
            ensemble_covariance(np.array([[1.0, 2.0]]))

    def test_covariance_positive_semidefinite(self):
        from dassim import cholesky

        rng = rng_stream(44)
        for _ in range(20):
            ensemble = rng.standard_normal((int(rng.integers(2, 30)), int(rng.integers(1, 5))))
            cov = ensemble_covariance(ensemble)
            cholesky(cov + 1e-12 * np.eye(cov.shape[0]))  # must not raise


class TestForecastEnsemble:
    def test_identity_no_noise(self):
        ensemble = rng_stream(1).standard_normal((6, 2))
        out = forecast_ensemble(ensemble, identity_model(), 0.0, rng_stream(0), add_noise=False)
        assert np.array_equal(out, ensemble)

    def test_single_member_matches_kf_prediction(self):
        system, _, _, _, _, Q = spring_mass_default(r_var=0.01)
        model = discretize(system, 0.01, Q)
        x = np.array([1.5, -0.5])
        out = forecast_ensemble(x[None, :], model, 0.03, rng_stream(0), add_noise=False)
        reference = predict(GaussianState(mean=x, cov=np.zeros((2, 2))), model, 0.03)
        assert np.allclose(out[0], reference.mean, atol=1e-14)

    def test_noise_grows_covariance_by_q(self):
        # initial spread of the same scale as Q keeps the anomaly/noise
        # cross term (std ~ 2 sqrt(P Q / m), the dominant error) near 2%
        q = 0.0005 * np.eye(2)
        ensemble = init_ensemble(np.zeros(2), q, 10_000, rng_stream(55))
        before = ensemble_covariance(ensemble)
        after = ensemble_covariance(
            forecast_ensemble(ensemble, identity_model(Q=q), 0.0, rng_stream(56), add_noise=True)
        )
        growth = after - before
        assert np.abs(np.diag(growth) / np.diag(q) - 1.0).max() < 0.1
        assert abs(growth[0, 1]) < 0.1 * 0.0005

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            forecast_ensemble(np.zeros((4, 3)), identity_model(2), 0.0, rng_stream(0))


class TestPerturbObservation:
    def test_zero_noise_copies(self):
        out = perturb_observation(np.array([2.0]), np.zeros((1, 1)), 4, rng_stream(0))
        assert np.array_equal(out, np.tile([2.0], (4, 1)))

    def test_tiny_noise_close_to_observation(self):
        out = perturb_observation(np.array([2.0]), 1e-30 * np.eye(1), 4, rng_stream(0))
        assert np.abs(out - 2.0).max() < 1e-10

    def test_mean_concentrates(self):
        out = perturb_observation(np.array([2.0]), R_BENCH, 100_000, rng_stream(66))
        assert abs(out.mean() - 2.0) < 0.01 * np.sqrt(R_BENCH[0, 0])

    def test_deterministic_given_seed(self):
        draw = lambda: perturb_observation(np.array([2.0]), R_BENCH, 10, rng_stream(7))
        assert np.array_equal(draw(), draw())


class TestEnkfUpdate:
    def setup_method(self):
        self.obs = ObservationModel(H=H_BENCH, R=R_BENCH)

    def test_zero_spread_unchanged(self):
        ensemble = np.tile([1.0, 0.0], (8, 1))
        out = enkf_update(ensemble, np.array([5.0]), self.obs, rng_stream(0))
        assert np.array_equal(out, ensemble)

    def test_large_ensemble_mean_matches_kf_analysis(self):
        rng = rng_stream(88)
        ensemble = init_ensemble(np.array([2.0, 0.0]), P_FULL, 10_000, rng)
        z = np.array([2.1])
        updated_mean = ensemble_mean(enkf_update(ensemble, z, self.obs, rng))
        # KF analysis for the same prior moments (the ensemble's own)
        prior = GaussianState(mean=ensemble_mean(ensemble), cov=ensemble_covariance(ensemble))
        reference = update(prior, z, self.obs).mean
        assert np.linalg.norm(updated_mean - reference) / np.linalg.norm(reference) < 0.02

    def test_diagonal_covariance_leaves_unobserved_component(self):
        a, b = 0.3, 0.2
        ensemble = np.array([[a, b], [-a, b], [a, -b], [-a, -b]])
        out = enkf_update(ensemble, np.array([0.5]), self.obs, rng_stream(9))
        assert np.abs(out[:, 1] - ensemble[:, 1]).max() < 1e-12

    def test_zero_obs_noise_reduces_to_kf_member_updates(self):
        rng = rng_stream(10)
        ensemble = rng.standard_normal((50, 2))
        obs = ObservationModel(H=H_BENCH, R=np.zeros((1, 1)))
        z = np.array([0.7])
        out = enkf_update(ensemble, z, obs, rng_stream(0))
        p_e = ensemble_covariance(ensemble)
        for i in range(50):
            member = update(GaussianState(mean=ensemble[i], cov=p_e), z, obs).mean
            assert np.abs(out[i] - member).max() < 1e-10


class TestGainConsistency:
    def test_ensemble_gain_matches_kf_gain(self):
        ensemble = init_ensemble(np.array([2.0, 0.0]), P_FULL, 100_000, rng_stream(111))
        p_e = ensemble_covariance(ensemble)
        ensemble_gain = kalman_gain(p_e, H_BENCH, R_BENCH)
        exact_gain = kalman_gain(P_FULL, H_BENCH, R_BENCH)
        assert np.abs(ensemble_gain / exact_gain - 1.0).max() < 0.05


@pytest.fixture(scope="module")
def benchmark():
    system, obs, truth_x0, guess_x0, P0, Q = spring_mass_default(r_var=0.01)
    model = discretize(system, 0.01, Q)
    truth = simulate_truth(model, truth_x0, 2000, rng_stream([42, 0]))
    observations = list(generate_observations(truth, obs, rng_stream([42, 1])))
    return model, obs, truth, observations, guess_x0, P0


class TestRunEnkf:
    def test_tracks_truth_from_wrong_guess(self, benchmark):
        model, obs, truth, observations, guess_x0, P0 = benchmark
        means, _ = run_enkf(model, obs, observations, guess_x0, P0, 100, rng_stream([42, 2]))
        half = range(len(truth) // 2, len(truth))
        errors = [means[k][0] - truth.states[k][0] for k in half]
        assert np.sqrt(np.mean(np.square(errors))) < np.sqrt(R_BENCH[0, 0])

    def test_minimal_ensemble_completes(self, benchmark):
        model, obs, _, observations, guess_x0, P0 = benchmark
        means, covs = run_enkf(model, obs, observations[:50], guess_x0, P0, 2, rng_stream(0))
        assert means.shape == (50, 2)
        assert np.isfinite(means).all() and np.isfinite(covs).all()

    def test_deterministic_given_seed(self, benchmark):
        model, obs, _, observations, guess_x0, P0 = benchmark
        first = run_enkf(model, obs, observations[:80], guess_x0, P0, 20, rng_stream(3))
        second = run_enkf(model, obs, observations[:80], guess_x0, P0, 20, rng_stream(3))
        assert np.array_equal(first[0], second[0])
        assert np.array_equal(first[1], second[1])

    def test_forecast_through_missing_observations(self, benchmark):
        model, obs, _, observations, guess_x0, P0 = benchmark
        strided = [z if k % 4 == 0 else None for k, z in enumerate(observations[:60])]
        means, _ = run_enkf(model, obs, strided, guess_x0, P0, 30, rng_stream(4))
        assert means.shape == (60, 2)

    def test_lagged_covariance_variant_differs_but_completes(self, benchmark):
        model, obs, _, observations, guess_x0, P0 = benchmark
        standard, _ = run_enkf(model, obs, observations[:60], guess_x0, P0, 30, rng_stream(6))
        lagged, _ = run_enkf(
            model, obs, observations[:60], guess_x0, P0, 30, rng_stream(6), lagged_covariance=True
        )
        assert np.isfinite(lagged).all()
        assert not np.array_equal(standard, lagged)
