import json
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from climdyn.config import RunConfig
from climdyn.emulator import DesignGrid, GpParams, LookupTable, build_design_grid
from climdyn.ingest import AlignedDataset, RawTemperatureSeries, build_aligned_dataset

OBSERVED_YEARS = (1850, 1890)
MODEL_YEARS = (1850, 1910)


@pytest.fixture
def grid() -> DesignGrid:
    return build_design_grid(10, (0.0, 5.0), seed=3)


@pytest.fixture
def params() -> GpParams:
    return GpParams(beta=[0.5, 0.2, 0.8], sigma2_f=0.4, r=[5.0, 5.0], sigma2_eps=0.01)


@pytest.fixture
def table(grid: DesignGrid, params: GpParams) -> LookupTable:
    rng = np.random.default_rng(11)
    base = LookupTable.build(grid, np.zeros(grid.n), params.r)
    d = grid.H @ params.beta + np.sqrt(params.sigma2_f) * base.chol @ rng.standard_normal(
        grid.n
    )
    return base.with_d(d)


def _celsius_models(rng: np.random.Generator, n_years: int) -> np.ndarray:
    """Three model series in °C where the first and last straddle the middle one."""
    years = np.arange(n_years)
    middle = 14.0 + 0.01 * years + 0.05 * np.sin(years / 4.0)
    spread = rng.normal(0.0, 0.3, size=n_years)
    return np.stack([middle + spread, middle, middle - spread])


@pytest.fixture
def synthetic_dataset() -> AlignedDataset:
    rng = np.random.default_rng(5)
    n_years = MODEL_YEARS[1] - MODEL_YEARS[0] + 1
    models = _celsius_models(rng, n_years)
    n_observed = OBSERVED_YEARS[1] - OBSERVED_YEARS[0] + 1
    observed = models[1, :n_observed] - 14.0 + rng.normal(0.0, 0.02, size=n_observed)
    return build_aligned_dataset(
        RawTemperatureSeries(OBSERVED_YEARS[0], observed, "anomaly-celsius", "observed"),
        [
            RawTemperatureSeries(MODEL_YEARS[0], values, "absolute-celsius", f"m{k + 1}")
            for k, values in enumerate(models)
        ],
    )


@pytest.fixture
def write_manifest(tmp_path: Path) -> Callable[..., Path]:
    """Write year,value CSVs and a manifest naming them; returns the manifest path."""

    def _write(n_models: int = 3, unit: str = "absolute-celsius") -> Path:
        rng = np.random.default_rng(7)
        n_years = MODEL_YEARS[1] - MODEL_YEARS[0] + 1
        models = _celsius_models(rng, n_years)[:n_models]
        n_observed = OBSERVED_YEARS[1] - OBSERVED_YEARS[0] + 1
        observed = models[0, :n_observed] - 14.0
        entries = []

        def _csv(name: str, start: int, values: np.ndarray) -> str:
            lines = ["year,value"] + [
                f"{start + i},{value:.6f}" for i, value in enumerate(values)
            ]
            (tmp_path / name).write_text("\n".join(lines) + "\n")
            return name

        entries.append(
            {
                "path": _csv("observed.csv", OBSERVED_YEARS[0], observed),
                "unit": "anomaly-celsius",
                "role": "observed",
                "label": "observed",
            }
        )
        for k, values in enumerate(models):
            entries.append(
                {
                    "path": _csv(f"model{k + 1}.csv", MODEL_YEARS[0], values),
                    "unit": unit,
                    "role": "model",
                    "label": f"m{k + 1}",
                }
            )
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps({"series": entries}))
        return manifest

    return _write


@pytest.fixture
def tiny_config() -> RunConfig:
    """A run configuration small enough for the test suite."""
    return RunConfig(
        scenario="test",
        seed=1,
        workers=1,
        n_total=40,
        n_burnin=10,
        grid_size=8,
        n_paths=20,
        penalty_grid_size=19,
        gibbs_iter=300,
        gibbs_burn=50,
        marginal_draws=10,
        mv_n_total=6,
        mv_n_burnin=2,
        mv_grid_size=6,
        mv_d_block_size=3,
    )
