import json

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from climdyn.config import RunConfig
from climdyn.emulator import (
    DataSegment,
    GpParams,
    LookupTable,
    basis,
    build_design_grid,
    corr_matrix,
    first_input,
    lookup_prior_moments,
    one_step_conditional,
    path_log_likelihood,
    segment_terms,
)
from climdyn.errors import ChainMismatch, CholeskyFailure, ConfigError
from climdyn.ingest import AlignedDataset
from climdyn.multivariate import (
    MvChainConfig,
    MvChainOutput,
    MvGpParams,
    batched_normal_logpdf,
    chol_log_jacobian,
    chol_to_theta,
    cholesky,
    derive_mv_prior_config,
    ensemble_inverse_posterior,
    kronecker_moments,
    matrix_normal_logpdf,
    mv_future_segment,
    mv_log_posterior,
    mv_lookup_conditional_on_first_step,
    mv_lookup_log_density,
    mv_lookup_prior,
    mv_one_step_conditional,
    mv_path_log_likelihood,
    mv_run_chain,
    mv_simulate_path,
    sample_matrix_normal,
    theta_to_chol,
)
from climdyn.sampler import lookup_log_density, tmcmc_step


@pytest.fixture
def mv_params() -> MvGpParams:
    return MvGpParams(
        B=np.array([[1.0, 0.8], [0.1, 0.0], [0.5, 0.1], [0.1, 0.6]]),
        Sigma_f=np.array([[0.3, 0.1], [0.1, 0.2]]),
        Sigma_eps=np.array([[0.02, 0.005], [0.005, 0.03]]),
        r=np.array([4.0, 3.0, 5.0]),
    )


@pytest.fixture
def mv_table(mv_params: MvGpParams) -> LookupTable:
    grid = build_design_grid(8, (-5.0, 5.0), seed=2, dim=2)
    rng = np.random.default_rng(3)
    return LookupTable.build(grid, rng.normal(size=(grid.n, 2)), mv_params.r)


def test_matrix_normal_logpdf_matches_scipy() -> None:
    rng = np.random.default_rng(0)
    row = np.cov(rng.normal(size=(5, 12)))
    col = np.cov(rng.normal(size=(3, 12)))
    X = rng.normal(size=(5, 3))
    mean = rng.normal(size=(5, 3))
    expected = stats.matrix_normal.logpdf(X, mean, row, col)
    actual = matrix_normal_logpdf(X, mean, np.linalg.cholesky(row), np.linalg.cholesky(col))
    assert actual == pytest.approx(expected)


def test_kronecker_moments_describe_the_stacked_rows() -> None:
    rng = np.random.default_rng(1)
    row = np.cov(rng.normal(size=(4, 10)))
    col = np.cov(rng.normal(size=(2, 10)))
    X = rng.normal(size=(4, 2))
    mean, cov = kronecker_moments(np.zeros((4, 2)), row, col)
    expected = stats.multivariate_normal.logpdf(X.ravel(), mean, cov)
    assert matrix_normal_logpdf(
        X, np.zeros((4, 2)), np.linalg.cholesky(row), np.linalg.cholesky(col)
    ) == pytest.approx(expected)


def test_batched_normal_logpdf() -> None:
    rng = np.random.default_rng(2)
    x = rng.normal(size=(3, 2))
    means = rng.normal(size=(3, 2))
    covs = np.stack([np.eye(2) * (k + 1) + 0.1 for k in range(3)])
    expected = [stats.multivariate_normal.logpdf(x[k], means[k], covs[k]) for k in range(3)]
    assert_allclose(batched_normal_logpdf(x, means, covs), expected)
    with pytest.raises(CholeskyFailure):
        batched_normal_logpdf(x, means, -covs)


def test_cholesky_parameterisation() -> None:
    C = np.array([[1.5, 0.0], [-0.4, 0.7]])
    assert_allclose(theta_to_chol(chol_to_theta(C), 2), C)
    with pytest.raises(CholeskyFailure):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]), "Sigma_f")


def test_cholesky_log_jacobian_matches_finite_differences() -> None:
    theta = np.array([0.3, -0.2, 0.5])

    def _vech(t: np.ndarray) -> np.ndarray:
        C = theta_to_chol(t, 2)
        Sigma = C @ C.T
        return Sigma[np.tril_indices(2)]

    h = 1e-6
    jacobian = np.column_stack(
        [(_vech(theta + h * e) - _vech(theta - h * e)) / (2 * h) for e in np.eye(3)]
    )
    numeric = np.log(abs(np.linalg.det(jacobian)))
    analytic = chol_log_jacobian(theta_to_chol(theta, 2)) + 2 * np.log(2.0)
    assert numeric == pytest.approx(analytic, abs=1e-6)


def test_params_need_k_plus_two_rows() -> None:
    with pytest.raises(ValueError):
        MvGpParams(B=np.zeros((3, 2)), Sigma_f=np.eye(2), Sigma_eps=np.eye(2), r=np.ones(3))


def test_lookup_density_is_matrix_normal(mv_table: LookupTable, mv_params: MvGpParams) -> None:
    expected = stats.matrix_normal.logpdf(
        mv_table.d, mv_table.H @ mv_params.B, mv_table.corr, mv_params.Sigma_f
    )
    assert mv_lookup_log_density(mv_table, mv_params) == pytest.approx(expected)


def test_path_log_likelihood_sums_one_step_terms(
    mv_table: LookupTable, mv_params: MvGpParams
) -> None:
    values = np.array([[1.0, 0.5], [1.2, 0.4], [0.9, 0.7]])
    segment = DataSegment(start_index=20, known_prev=np.array([1.1, 0.6]), values=values)
    expected = 0.0
    prev = segment.known_prev
    for t, value in zip(segment.t_index, values):
        mean, cov = mv_one_step_conditional(prev, int(t), mv_table, mv_params)
        expected += stats.multivariate_normal.logpdf(value, mean, cov)
        prev = value
    assert mv_path_log_likelihood(segment, mv_table, mv_params) == pytest.approx(expected)


def test_mv_simulate_path(mv_table: LookupTable, mv_params: MvGpParams) -> None:
    a = mv_simulate_path(np.array([1.0, 1.0]), (1, 12), mv_table, mv_params, seed=4)
    b = mv_simulate_path(np.array([1.0, 1.0]), (1, 12), mv_table, mv_params, seed=4)
    assert a.shape == (12, 2)
    assert_allclose(a, b)


def test_derive_mv_prior_config(synthetic_dataset: AlignedDataset) -> None:
    ensemble = synthetic_dataset.ensemble()
    prior = derive_mv_prior_config(ensemble)
    thinned = ensemble[::5]
    assert prior.K == 3
    assert prior.nu_f == 3 and prior.nu_eps == 3
    assert_allclose(prior.B0[0], thinned.mean(axis=0))
    assert_allclose(prior.B0[1:], 0.0)
    assert_allclose(prior.Sigma_f0, np.cov(thinned, rowvar=False) / 2)
    assert np.isfinite(prior.log_prior(prior.initial_params()))


def test_derive_mv_prior_config_ridges_singular_ensembles() -> None:
    column = np.linspace(2.6, 2.7, 40)
    prior = derive_mv_prior_config(np.column_stack([column, column]))
    assert np.all(np.linalg.eigvalsh(prior.Sigma_f0) > 0)


def _mv_fit(dataset: AlignedDataset, n_total: int, n_burnin: int) -> MvChainOutput:
    future = mv_future_segment(dataset)
    prior = derive_mv_prior_config(dataset.ensemble())
    grid = build_design_grid(6, (-5.0, 5.0), seed=1, dim=dataset.K)
    config = MvChainConfig(n_total=n_total, n_burnin=n_burnin, d_block_size=3)
    return mv_run_chain(future, prior, grid, config, seed=5, labels=dataset.labels)


def test_mv_future_segment(synthetic_dataset: AlignedDataset) -> None:
    segment = mv_future_segment(synthetic_dataset)
    assert segment.dim == 3
    assert segment.start_index == synthetic_dataset.T0 + 1
    assert segment.values.shape == (synthetic_dataset.T - synthetic_dataset.T0, 3)


def test_mv_run_chain(synthetic_dataset: AlignedDataset) -> None:
    dataset = synthetic_dataset.restrict_models(2)
    chain = _mv_fit(dataset, n_total=6, n_burnin=2)
    assert len(chain) == 4
    assert chain.B.shape == (4, 4, 2)
    assert chain.D.shape == (4, 6, 2)
    assert chain.Sigma_f.shape == (4, 2, 2)
    assert chain.r.shape == (4, 3)
    assert set(chain.acceptance_rates) == {"B", "D", "r", "Sigma_f", "Sigma_eps"}
    assert set(chain.cholesky_rejections) == {"Sigma_f", "Sigma_eps"}
    for i in range(len(chain)):
        assert np.all(np.linalg.eigvalsh(chain.Sigma_f[i]) > 0)
        assert np.all(np.linalg.eigvalsh(chain.Sigma_eps[i]) > 0)

    restored = MvChainOutput.from_dict(json.loads(json.dumps(chain.to_dict())))
    assert restored.labels == ("m1", "m2")
    assert restored.fingerprint == chain.fingerprint
    assert_allclose(restored.D, chain.D, rtol=1e-10)
    assert_allclose(restored.Sigma_eps, chain.Sigma_eps, rtol=1e-10)


def test_mv_run_chain_without_iterations(synthetic_dataset: AlignedDataset) -> None:
    chain = _mv_fit(synthetic_dataset.restrict_models(2), n_total=0, n_burnin=0)
    assert len(chain) == 1
    with pytest.raises(ConfigError):
        MvChainConfig(n_total=3, n_burnin=4)
    with pytest.raises(ConfigError):
        MvChainConfig(scales={"B": -1.0})


def test_mv_run_chain_stores_the_kept_states(synthetic_dataset: AlignedDataset) -> None:
    dataset = synthetic_dataset.restrict_models(2)
    chain = _mv_fit(dataset, n_total=5, n_burnin=2)
    future = mv_future_segment(dataset)
    prior = derive_mv_prior_config(dataset.ensemble())
    assert len(chain) == 3
    for i in range(len(chain)):
        params, table = chain.draw(i)
        expected = mv_log_posterior(
            params, table, segment_terms(future, table), future, prior
        )
        assert chain.log_post[i] == pytest.approx(expected, rel=1e-9)

    burnt = _mv_fit(dataset, n_total=3, n_burnin=3)
    assert len(burnt) == 0
    assert burnt.B.shape == (0, 4, 2)
    assert burnt.D.shape == (0, 6, 2)


def test_mv_chain_scales_default_to_the_run_config() -> None:
    assert MvChainConfig().scales == RunConfig().mv_tmcmc_scales
    assert MvChainConfig(scales={"r": 0.2}).scales == {
        **RunConfig().mv_tmcmc_scales,
        "r": 0.2,
    }


def test_ensemble_inverse_posterior(synthetic_dataset: AlignedDataset) -> None:
    dataset = synthetic_dataset.restrict_models(2)
    chain = _mv_fit(dataset, n_total=3, n_burnin=1)
    future = mv_future_segment(dataset)
    mean = ensemble_inverse_posterior(future, chain, dataset.x0, "mean", 5, seed=9)
    top = ensemble_inverse_posterior(future, chain, dataset.x0, "max", 5, seed=9)
    assert mean.origin == "ensemble-mean"
    assert top.origin == "ensemble-max"
    assert mean.draws.shape == (5, dataset.T0)
    assert np.all(top.draws >= mean.draws)
    with pytest.raises(ConfigError):
        ensemble_inverse_posterior(future, chain, dataset.x0, "median", 5)
    with pytest.raises(ChainMismatch):
        ensemble_inverse_posterior(
            mv_future_segment(synthetic_dataset.restrict_models(1)),
            chain,
            dataset.x0,
            "mean",
            5,
        )


def test_lookup_conditional_on_first_step_matches_kronecker_conditioning(
    mv_params: MvGpParams,
) -> None:
    grid = build_design_grid(6, (-5.0, 5.0), seed=4, dim=2)
    x0 = np.array([1.0, 0.5])
    f10 = np.array([1.3, 0.9])
    mean, row, col = mv_lookup_prior(grid, mv_params)
    assert_allclose(mean, grid.H @ mv_params.B)
    assert_allclose(row, corr_matrix(grid.points, grid.points, mv_params.r))
    assert_allclose(col, mv_params.Sigma_f)

    points = np.vstack([first_input(x0)[np.newaxis, :], grid.points])
    joint_mean, joint_cov = kronecker_moments(
        basis(points) @ mv_params.B,
        corr_matrix(points, points, mv_params.r),
        mv_params.Sigma_f,
    )
    K = 2
    gain = np.linalg.solve(joint_cov[:K, :K], joint_cov[:K, K:]).T
    expected_mean = joint_mean[K:] + gain @ (f10 - joint_mean[:K])
    expected_cov = joint_cov[K:, K:] - gain @ joint_cov[:K, K:]

    mean, row, col = mv_lookup_conditional_on_first_step(grid, mv_params, x0, f10)
    actual_mean, actual_cov = kronecker_moments(mean, row, col)
    assert_allclose(actual_mean, expected_mean)
    assert_allclose(actual_cov, expected_cov, atol=1e-12)


def test_a_single_series_reduces_to_the_univariate_emulator() -> None:
    rng = np.random.default_rng(17)
    grid = build_design_grid(8, (0.0, 5.0), seed=6)
    close = {"rel": 1e-10, "abs": 1e-10}
    for _ in range(50):
        params = GpParams(
            beta=rng.normal(size=3),
            sigma2_f=float(rng.uniform(0.1, 1.0)),
            r=rng.uniform(1.0, 8.0, size=2),
            sigma2_eps=float(rng.uniform(0.01, 0.1)),
        )
        mv = MvGpParams(
            B=params.beta[:, np.newaxis],
            Sigma_f=[[params.sigma2_f]],
            Sigma_eps=[[params.sigma2_eps]],
            r=params.r,
        )
        d = rng.normal(size=grid.n)
        table = LookupTable.build(grid, d, params.r)
        mv_table = LookupTable.build(grid, d[:, np.newaxis], params.r)

        x_prev, t_next = float(rng.uniform(1.0, 4.0)), int(rng.integers(1, 200))
        mean, variance = one_step_conditional(x_prev, t_next, table, params)
        mv_mean, mv_cov = mv_one_step_conditional(np.array([x_prev]), t_next, mv_table, mv)
        assert mv_mean[0] == pytest.approx(mean, **close)
        assert mv_cov[0, 0] == pytest.approx(variance, **close)

        values = rng.uniform(1.0, 4.0, size=6)
        segment = DataSegment(start_index=20, known_prev=x_prev, values=values)
        mv_segment = DataSegment(
            start_index=20, known_prev=np.array([x_prev]), values=values[:, np.newaxis]
        )
        assert mv_path_log_likelihood(mv_segment, mv_table, mv) == pytest.approx(
            path_log_likelihood(segment, table, params), **close
        )
        assert mv_lookup_log_density(mv_table, mv) == pytest.approx(
            lookup_log_density(table, params), **close
        )

        prior_mean, prior_cov = lookup_prior_moments(grid, params)
        vec_mean, vec_cov = kronecker_moments(*mv_lookup_prior(grid, mv))
        assert_allclose(vec_mean, prior_mean, rtol=1e-10, atol=1e-10)
        assert_allclose(vec_cov, prior_cov, rtol=1e-10, atol=1e-10)


def test_matrix_normal_draws_have_kronecker_covariance(mv_params: MvGpParams) -> None:
    grid = build_design_grid(4, (-5.0, 5.0), seed=8, dim=2)
    mean, row, col = mv_lookup_prior(grid, mv_params)
    n_draws = 10000
    draws = sample_matrix_normal(
        mean,
        np.linalg.cholesky(row),
        np.linalg.cholesky(col),
        np.random.default_rng(12),
        size=n_draws,
    )
    assert draws.shape == (n_draws, 4, 2)
    vec_mean, expected = kronecker_moments(mean, row, col)
    centred = draws.reshape(n_draws, -1) - vec_mean
    products = centred[:, :, np.newaxis] * centred[:, np.newaxis, :]
    error = np.abs(products.mean(axis=0) - expected)
    assert np.all(error <= 4 * products.std(axis=0) / np.sqrt(n_draws))


@pytest.mark.slow
def test_cholesky_moves_sample_an_inverse_wishart() -> None:
    target = stats.invwishart(df=6, scale=np.eye(2))

    def _log_target(theta: np.ndarray) -> float:
        C = theta_to_chol(theta, 2)
        return float(target.logpdf(C @ C.T)) + chol_log_jacobian(C)

    rng = np.random.default_rng(31)
    theta = chol_to_theta(np.sqrt(1 / 3) * np.eye(2))
    logp = _log_target(theta)
    draws = []
    for i in range(210000):
        theta, logp, _ = tmcmc_step(theta, logp, _log_target, 0.3, rng)
        if i >= 10000 and i % 10 == 0:
            C = theta_to_chol(theta, 2)
            draws.append((C @ C.T)[0, 0])
    # One diagonal entry of an inverse Wishart is inverse gamma.
    marginal = stats.invgamma(a=2.5, scale=0.5)
    assert stats.kstest(draws, marginal.cdf).statistic < 0.03
