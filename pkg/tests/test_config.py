import json
from pathlib import Path

import pytest

from climdyn.config import DESK_MAX_MODELS, RunConfig, load_run_config
from climdyn.errors import ConfigError


def _write(tmp_path: Path, document: object) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_defaults() -> None:
    config = load_run_config()
    assert config.profile == "paper"
    assert config.n_total == 60000
    assert config.n_burnin == 10000
    assert config.grid_size == 50
    assert config.penalty_grid_size == 199
    assert config.c == 0.01
    assert config.alpha == 0.05
    assert config.max_models is None
    assert config.inclusion_rule == "difference"


def test_desk_profile_shortens_chains() -> None:
    config = load_run_config(profile="desk")
    assert config.n_total == 6000
    assert config.n_burnin == 1000
    assert config.mv_n_total == 6000
    assert config.max_models == DESK_MAX_MODELS


def test_resolution_order(tmp_path: Path) -> None:
    path = _write(tmp_path, {"profile": "desk", "n_total": 500, "n_burnin": 100, "seed": 7})
    config = load_run_config(path)
    assert config.profile == "desk"
    assert config.n_total == 500
    assert config.seed == 7
    # Flags win over the file, and None leaves the file value alone.
    config = load_run_config(path, profile="paper", overrides={"seed": 9, "n_total": None})
    assert config.profile == "paper"
    assert config.seed == 9
    assert config.n_total == 500
    assert config.max_models is None


def test_unknown_key_suggests_a_name(tmp_path: Path) -> None:
    path = _write(tmp_path, {"n_totl": 5})
    with pytest.raises(ConfigError) as excinfo:
        load_run_config(path)
    message = str(excinfo.value)
    assert "n_totl" in message
    assert "Did you mean" in message
    assert "'n_total'" in message
    assert str(path) in message


def test_unknown_mv_block(tmp_path: Path) -> None:
    path = _write(tmp_path, {"mv_tmcmc_scales": {"Sigma_F": 0.1}})
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_mv_scales_merge_with_defaults(tmp_path: Path) -> None:
    config = load_run_config(_write(tmp_path, {"mv_tmcmc_scales": {"D": 0.5}}))
    assert config.mv_tmcmc_scales["D"] == 0.5
    assert config.mv_tmcmc_scales["B"] == 0.01


@pytest.mark.parametrize(
    "document",
    [
        {"n_total": "many"},
        {"n_total": True},
        {"alpha": [0.05]},
        {"value_range": [0.0]},
        {"marginal_estimator": "harmonic"},
        {"epsilon_law": "gaussian"},
    ],
)
def test_bad_types(tmp_path: Path, document: dict[str, object]) -> None:
    with pytest.raises(ConfigError):
        load_run_config(_write(tmp_path, document))


@pytest.mark.parametrize(
    "changes",
    [
        {"n_burnin": 70000},
        {"alpha": 1.0},
        {"c": 0.0},
        {"gibbs_burn": 100000},
        {"workers": 0},
        {"tmcmc_scales": (0.1, 0.1)},
        {"grid_size": 1},
    ],
)
def test_validation(changes: dict[str, object]) -> None:
    with pytest.raises(ConfigError):
        RunConfig().merge(changes)


def test_missing_and_malformed_files(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(broken)


def test_to_dict_reloads(tmp_path: Path) -> None:
    config = RunConfig(seed=3, value_range=(0.5, 4.5), workers=2)
    document = config.to_dict()
    document.pop("profile")
    assert RunConfig.from_dict(document) == config
    assert load_run_config(_write(tmp_path, document)) == config
