import numpy as np
import pytest
from numpy.testing import assert_allclose

from climdyn.emulator import DataSegment, build_design_grid, derive_prior_config
from climdyn.errors import (
    AxisMismatch,
    ChainMismatch,
    MeshTooNarrow,
    NonFinitePaths,
    NonPositiveC,
)
from climdyn.ingest import AlignedDataset, LogTempSeries
from climdyn.posterior import (
    PosteriorPathDraws,
    benchmark_band,
    discrepancy_s1,
    discrepancy_s2,
    forecast_table,
    future_segment,
    goodness_of_fit,
    observed_segment,
    sample_forward_posterior,
    sample_inverse_posterior,
    summarize_paths,
    value_mesh,
    verdict,
)
from climdyn.sampler import run_chain


def _draws(values: np.ndarray, origin: str = "inverse") -> PosteriorPathDraws:
    values = np.asarray(values, dtype=float)
    return PosteriorPathDraws(values, 1851 + np.arange(values.shape[1]), origin)


def test_summary_of_a_known_sample() -> None:
    rng = np.random.default_rng(0)
    values = rng.normal(2.6, 0.05, size=(400, 6))
    summary = summarize_paths(_draws(values), alpha=0.05)
    assert summary.mass.shape == (6, 512)
    assert_allclose(summary.mass.sum(axis=1), 1.0)
    assert_allclose(summary.mean, values.mean(axis=0))
    assert_allclose(summary.variance, values.var(axis=0))
    lower, upper = np.quantile(values, [0.025, 0.975], axis=0)
    assert_allclose(summary.lower, lower)
    assert_allclose(summary.upper, upper)
    assert np.all((summary.mode >= values.min(axis=0)) & (summary.mode <= values.max(axis=0)))
    frame = summary.to_frame()
    assert list(frame.columns) == ["year", "value", "mass"]
    assert len(frame) == 6 * 512


def test_summary_of_a_point_mass() -> None:
    values = np.tile([[2.5, 2.7]], (30, 1))
    summary = summarize_paths(_draws(values))
    cell = summary.edges[1] - summary.edges[0]
    for t, value in enumerate([2.5, 2.7]):
        (occupied,) = np.flatnonzero(summary.mass[t])
        assert summary.mode[t] == summary.centers[occupied]
        assert abs(summary.mode[t] - value) <= cell / 2
    assert_allclose(summary.variance, [0.0, 0.0])


def test_mode_ties_go_to_the_lowest_cell() -> None:
    values = np.array([[0.0], [0.0], [1.0], [1.0]])
    mesh = np.array([-0.5, 0.5, 1.5])
    summary = summarize_paths(_draws(values), mesh=mesh)
    assert summary.mode[0] == 0.0


def test_mesh_must_cover_the_draws() -> None:
    values = np.array([[0.0], [2.0]])
    with pytest.raises(MeshTooNarrow):
        summarize_paths(_draws(values), mesh=np.linspace(0.0, 1.0, 11))


def test_value_mesh_pads_the_range() -> None:
    edges = value_mesh(_draws(np.array([[1.0], [3.0]])), cells=4)
    assert_allclose(edges[[0, -1]], [0.98, 3.02])


def test_paths_must_be_finite() -> None:
    with pytest.raises(NonFinitePaths):
        _draws(np.array([[1.0, np.nan]]))


def test_discrepancies_by_hand() -> None:
    v = np.array([1.0, 3.0])
    modes = np.array([0.0, 1.0])
    variances = np.array([0.99, 3.99])
    assert discrepancy_s1(v, modes, variances) == pytest.approx(0.5 * (1.0 + 1.0))
    assert discrepancy_s2(v, modes, variances) == pytest.approx(0.5 * (1.0 + 1.0))
    rows = discrepancy_s2(np.stack([v, modes]), modes, variances)
    assert_allclose(rows, [1.0, 0.0])
    with pytest.raises(NonPositiveC):
        discrepancy_s1(v, modes, variances, c=0.0)
    with pytest.raises(AxisMismatch):
        discrepancy_s1(v, np.zeros(3), np.zeros(3))


def test_verdict() -> None:
    assert verdict(0.5, 1.0, 2.0) == "overfits"
    assert verdict(2.5, 1.0, 2.0) == "underfits"
    assert verdict(1.5, 1.0, 2.0) == "fits"
    assert verdict(1.0, 1.0, 2.0) == "fits"


def test_goodness_of_fit_of_a_typical_path() -> None:
    rng = np.random.default_rng(3)
    values = rng.normal(0.0, 1.0, size=(2000, 40))
    draws = _draws(values)
    report = goodness_of_fit(draws, rng.normal(0.0, 1.0, size=40), c=0.01, label="m")
    for name in ("s1", "s2"):
        assert report[name].lower < report[name].upper
        assert report[name].verdict == verdict(
            report[name].observed, report[name].lower, report[name].upper
        )
    row = report.table_row()
    assert row["model"] == "m"
    assert {"s1", "s1_lower", "s2_upper", "s2_verdict"} <= set(row)
    with pytest.raises(AxisMismatch):
        goodness_of_fit(draws, np.zeros(39))


def test_goodness_of_fit_flags_a_far_away_series() -> None:
    rng = np.random.default_rng(4)
    draws = _draws(rng.normal(0.0, 0.1, size=(500, 30)))
    report = goodness_of_fit(draws, np.full(30, 5.0))
    assert report["s1"].verdict == "underfits"
    assert report["s2"].verdict == "underfits"


def test_benchmark_band_from_the_observed_year() -> None:
    series = LogTempSeries(start_year=2000, x=np.log(np.full(10, 14.4)), label="obs")
    band = benchmark_band(series, 2008, 0.5)
    assert band.year == 2008
    assert_allclose(band.celsius, (13.9, 14.9))
    fallback = benchmark_band(series, 1990, 0.5)
    assert fallback.year is None
    assert_allclose(fallback.celsius, (13.895, 14.895))


def test_forecast_table_columns() -> None:
    rng = np.random.default_rng(6)
    draws = _draws(np.log(rng.normal(14.4, 0.2, size=(300, 5))), origin="forward")
    wide = summarize_paths(draws, alpha=0.05)
    narrow = summarize_paths(draws, mesh=wide.edges, alpha=0.5)
    band = benchmark_band(LogTempSeries(1851, np.log(np.full(3, 14.4)), "obs"), 1852)
    table = forecast_table(wide, narrow, band, np.log(np.full(5, 14.5)), np.log(np.full(5, 14.6)))
    assert list(table.columns) == [
        "year",
        "gpfgt",
        "lower50",
        "upper50",
        "lower95",
        "upper95",
        "ambfgt",
        "mbfgt",
        "band_lower",
        "band_upper",
        "band_in_50",
    ]
    assert_allclose(table["ambfgt"], 14.5)
    assert np.all(table["lower95"] <= table["lower50"])
    assert np.all(table["upper50"] <= table["upper95"])


def test_segments_of_a_dataset(synthetic_dataset: AlignedDataset) -> None:
    observed = observed_segment(synthetic_dataset)
    assert observed.start_index == 1
    assert observed.uses_marginal_first_step
    assert observed.known_prev == synthetic_dataset.x0
    assert len(observed) == synthetic_dataset.T0
    future = future_segment(synthetic_dataset, synthetic_dataset.averaged)
    assert future.start_index == synthetic_dataset.T0 + 1
    assert future.end_index == synthetic_dataset.T


def test_inverse_posterior_needs_the_matching_chain(
    synthetic_dataset: AlignedDataset,
) -> None:
    dataset = synthetic_dataset
    prior = derive_prior_config(dataset.averaged)
    future = future_segment(dataset, dataset.averaged)
    grid = build_design_grid(8, (0.0, 5.0), seed=1)
    chain = run_chain(future, prior, grid, n_total=20, n_burnin=5, seed=2)
    paths = sample_inverse_posterior(
        future, chain, dataset.x0, 15, seed=3, origin_year=dataset.origin_year
    )
    assert paths.draws.shape == (15, dataset.T0)
    assert paths.years[0] == 1851
    assert paths.years[-1] == dataset.year(dataset.T0)
    other = future_segment(dataset, dataset.models[0])
    with pytest.raises(ChainMismatch):
        sample_inverse_posterior(other, chain, dataset.x0, 15, seed=3)


def test_forecast_of_a_flat_series_contains_its_level() -> None:
    rng = np.random.default_rng(10)
    level = np.log(14.0)
    x = level + rng.normal(0.0, 0.002, size=41)
    series = LogTempSeries(start_year=1850, x=x, label="flat")
    observed = DataSegment(
        start_index=1, known_prev=x[0], values=x[1:], first_step_marginal=True
    )
    prior = derive_prior_config(series)
    grid = build_design_grid(10, (0.0, 5.0), seed=0)
    chain = run_chain(observed, prior, grid, n_total=400, n_burnin=100, seed=1)
    paths = sample_forward_posterior(observed, chain, 55, 200, seed=2)
    assert paths.draws.shape == (200, 15)
    summary = summarize_paths(paths, alpha=0.05)
    assert np.all(summary.lower <= level) and np.all(level <= summary.upper)
