import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from climdyn.emulator import (
    TIME_SCALE,
    DataSegment,
    DesignGrid,
    GpParams,
    LookupTable,
    basis,
    build_design_grid,
    conditional_moments,
    corr_kernel,
    corr_matrix,
    derive_prior_config,
    factor_correlation,
    first_input,
    input_matrix,
    inverse_gamma,
    lookup_conditional_on_first_step,
    lookup_prior_moments,
    one_step_conditional,
    path_log_likelihood,
    segment_terms,
    simulate_path,
    thinned_moments,
)
from climdyn.errors import (
    ConfigError,
    DegenerateRange,
    NonFiniteLikelihood,
    NonPositiveSmoothness,
    SeriesTooShort,
    SingularCorrelation,
    StaleCache,
)
from climdyn.ingest import LogTempSeries


def test_design_grid_is_a_latin_hypercube() -> None:
    n = 50
    grid = build_design_grid(n, (0.0, 5.0), seed=0)
    assert grid.points.shape == (n, 2)
    t_strata = np.floor(grid.points[:, 0] * n).astype(int)
    x_strata = np.floor(grid.points[:, 1] / 5.0 * n).astype(int)
    assert sorted(t_strata) == list(range(n))
    assert sorted(x_strata) == list(range(n))


def test_design_grid_is_reproducible() -> None:
    a = build_design_grid(20, (-5.0, 5.0), seed=9, dim=3)
    b = build_design_grid(20, (-5.0, 5.0), seed=9, dim=3)
    assert a.dim == 3
    assert_allclose(a.points, b.points)


def test_design_grid_rejects_bad_ranges() -> None:
    with pytest.raises(DegenerateRange):
        build_design_grid(10, (1.0, 1.0))
    with pytest.raises(ConfigError):
        build_design_grid(1)


def test_corr_kernel() -> None:
    z = np.array([0.2, 1.5])
    assert corr_kernel(z, z, [2.0, 3.0]) == 1.0
    w = np.array([0.5, 1.0])
    expected = np.exp(-(2.0 * 0.3**2 + 3.0 * 0.5**2))
    assert corr_kernel(z, w, [2.0, 3.0]) == pytest.approx(expected)
    with pytest.raises(NonPositiveSmoothness):
        corr_kernel(z, w, [0.0, 1.0])


def test_singular_correlation_on_repeated_points() -> None:
    grid = DesignGrid(points=np.array([[0.1, 1.0], [0.1, 1.0], [0.5, 2.0]]), seed=0)
    with pytest.raises(SingularCorrelation):
        factor_correlation(grid, [1.0, 1.0])


def test_interpolates_grid_values_without_noise() -> None:
    rng = np.random.default_rng(0)
    for trial in range(20):
        grid = build_design_grid(12, (0.0, 5.0), seed=trial)
        params = GpParams(
            beta=rng.normal(size=3),
            sigma2_f=float(rng.uniform(0.1, 2.0)),
            r=rng.uniform(5.0, 20.0, size=2),
            sigma2_eps=float(rng.uniform(0.01, 0.1)),
        )
        table = LookupTable.build(grid, rng.normal(size=grid.n), params.r)
        mean, variance = conditional_moments(table, params, grid.points, include_noise=False)
        assert_allclose(mean, table.d, atol=1e-8)
        assert np.all(variance <= 1e-8 * params.sigma2_f)


def test_grid_hit_variance_is_the_noise(table: LookupTable, params: GpParams) -> None:
    _, variance = conditional_moments(table, params, table.grid.points)
    assert_allclose(variance, params.sigma2_eps, atol=1e-10)


def test_one_step_conditional_off_grid(table: LookupTable, params: GpParams) -> None:
    mean, variance = one_step_conditional(2.5, 100, table, params)
    assert np.isfinite(mean)
    assert params.sigma2_eps < variance <= params.sigma2_f + params.sigma2_eps


def test_stale_cache(table: LookupTable, params: GpParams) -> None:
    with pytest.raises(StaleCache):
        conditional_moments(table, params.replace(r=np.array([1.0, 1.0])), np.zeros((1, 2)))


def test_marginal_first_step_likelihood(table: LookupTable, params: GpParams) -> None:
    segment = DataSegment(
        start_index=1, known_prev=2.0, values=np.array([2.3]), first_step_marginal=True
    )
    h = np.array([1.0, 1.0 / TIME_SCALE, 2.0])
    expected = stats.norm.logpdf(
        2.3, h @ params.beta, np.sqrt(params.sigma2_f + params.sigma2_eps)
    )
    assert path_log_likelihood(segment, table, params) == pytest.approx(expected)


def test_path_log_likelihood_sums_one_step_terms(
    table: LookupTable, params: GpParams
) -> None:
    values = np.array([2.1, 2.4, 2.2, 2.6])
    segment = DataSegment(start_index=30, known_prev=2.0, values=values)
    expected = 0.0
    prev = 2.0
    for t, value in zip(segment.t_index, values):
        mean, variance = one_step_conditional(prev, int(t), table, params)
        expected += stats.norm.logpdf(value, mean, np.sqrt(variance))
        prev = value
    assert path_log_likelihood(segment, table, params) == pytest.approx(expected)
    terms = segment_terms(segment, table)
    assert path_log_likelihood(segment, table, params, terms=terms) == pytest.approx(
        expected
    )


def test_path_log_likelihood_needs_positive_variance(
    table: LookupTable, params: GpParams
) -> None:
    segment = DataSegment(start_index=1, known_prev=2.0, values=np.array([2.1, 2.2]))
    degenerate = params.replace(sigma2_f=-1.0, sigma2_eps=0.0)
    with pytest.raises(NonFiniteLikelihood):
        path_log_likelihood(segment, table, degenerate)


def test_segment_fingerprint_tracks_values() -> None:
    a = DataSegment(start_index=5, known_prev=1.0, values=np.array([1.0, 2.0]))
    b = DataSegment(start_index=5, known_prev=1.0, values=np.array([1.0, 2.5]))
    assert a.fingerprint == DataSegment(5, 1.0, np.array([1.0, 2.0])).fingerprint
    assert a.fingerprint != b.fingerprint
    assert_allclose(a.previous, [1.0, 1.0])
    assert_allclose(a.inputs(), input_matrix(np.array([5, 6]), np.array([1.0, 1.0])))


def test_simulate_path_is_seeded(table: LookupTable, params: GpParams) -> None:
    a = simulate_path(2.0, (1, 25), table, params, seed=3)
    b = simulate_path(2.0, (1, 25), table, params, seed=3)
    assert a.shape == (25,)
    assert_allclose(a, b)
    with pytest.raises(ValueError):
        simulate_path(2.0, (5, 4), table, params)


def test_lookup_conditional_on_first_step_pins_the_first_input(
    grid: DesignGrid, params: GpParams
) -> None:
    mean, cov = lookup_conditional_on_first_step(grid, params, 2.0, 3.0)
    assert mean.shape == (grid.n,)
    assert_allclose(cov, cov.T)
    assert np.all(np.diag(cov) >= -1e-12)


def _condition_on_first(
    mean: np.ndarray, cov: np.ndarray, value: float
) -> tuple[np.ndarray, np.ndarray]:
    """Condition a joint Gaussian on its first coordinate."""
    gain = cov[1:, 0] / cov[0, 0]
    return mean[1:] + gain * (value - mean[0]), cov[1:, 1:] - np.outer(gain, cov[0, 1:])


def test_lookup_moments_match_joint_conditioning(grid: DesignGrid, params: GpParams) -> None:
    prior_mean, prior_cov = lookup_prior_moments(grid, params)
    assert_allclose(prior_mean, grid.H @ params.beta)
    assert_allclose(prior_cov, params.sigma2_f * corr_matrix(grid.points, grid.points, params.r))

    z = first_input(2.0)[np.newaxis, :]
    points = np.vstack([z, grid.points])
    joint_mean = basis(points) @ params.beta
    joint_cov = params.sigma2_f * corr_matrix(points, points, params.r)
    expected_mean, expected_cov = _condition_on_first(joint_mean, joint_cov, 3.0)
    mean, cov = lookup_conditional_on_first_step(grid, params, 2.0, 3.0)
    assert_allclose(mean, expected_mean)
    assert_allclose(cov, expected_cov, atol=1e-12)


def test_derive_prior_config() -> None:
    rng = np.random.default_rng(2)
    x = 2.6 + rng.normal(0.0, 0.05, size=200)
    series = LogTempSeries(start_year=1850, x=x, label="s")
    prior = derive_prior_config(series)
    thinned = x[::5]
    a = np.var(thinned, ddof=1) / 2
    assert prior.alpha_f == 4.01
    assert prior.gamma_f == pytest.approx(2.01 * a)
    assert_allclose(prior.beta0, [thinned.mean(), 0.0, 0.0])
    assert_allclose(prior.Sigma_beta0, np.eye(3))
    assert prior.mean_sigma2_f == pytest.approx(
        inverse_gamma(prior.alpha_f, prior.gamma_f).mean()
    )


def test_derive_prior_config_floors_constant_series() -> None:
    series = LogTempSeries(start_year=1850, x=np.full(50, 2.6), label="flat")
    prior = derive_prior_config(series)
    assert prior.gamma_f > 0
    assert np.isfinite(prior.log_prior(prior.initial_params()))


def test_thinned_moments_needs_two_points() -> None:
    with pytest.raises(SeriesTooShort):
        thinned_moments(np.arange(5.0), 5)
