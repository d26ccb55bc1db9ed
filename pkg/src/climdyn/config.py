import dataclasses
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from typing_extensions import Literal, TypeAlias

from ._util.io import read_json
from ._util.logging import getLogger
from ._util.serialise import (
    JsonValue,
    asdict_float,
    check_known_keys,
    parse_choice,
    parse_dict,
    parse_float,
    parse_int,
    parse_list_of,
    parse_opt,
    parse_str,
)
from .errors import ConfigError
from .sampler.tmcmc import EPSILON_LAWS

_LOGGER = getLogger(__name__)

Profile: TypeAlias = Literal["paper", "desk"]
PROFILES: tuple[str, ...] = ("paper", "desk")

MARGINAL_ESTIMATORS: tuple[str, ...] = ("posterior", "prior")
INCLUSION_RULES: tuple[str, ...] = ("difference", "reference")
MV_BLOCKS: tuple[str, ...] = ("B", "D", "r", "Sigma_f", "Sigma_eps")

DESK_CHAIN_DIVISOR = 10
DESK_MAX_MODELS = 5


def _parse_range(value: JsonValue) -> tuple[float, float]:
    bounds = parse_list_of(parse_float)(value)
    if len(bounds) != 2:
        raise TypeError(f"Expected [low, high], found {len(bounds)} values")
    return bounds[0], bounds[1]


def _parse_scales(value: JsonValue) -> tuple[float, ...]:
    return tuple(parse_list_of(parse_float)(value))


def _parse_mv_scales(value: JsonValue) -> dict[str, float]:
    scales = parse_dict(value)
    check_known_keys(scales, MV_BLOCKS, location="mv_tmcmc_scales")
    return {name: parse_float(scale) for name, scale in scales.items()}


def default_mv_scales() -> dict[str, float]:
    return {"B": 0.01, "D": 0.01, "r": 0.05, "Sigma_f": 0.02, "Sigma_eps": 0.02}


@dataclass(frozen=True)
class RunConfig:
    """
    Every tunable of a run.

    Values resolve as built-in defaults, then the profile, then the JSON
    config file, then explicit command-line flags.
    """

    scenario: str = "scenario"
    manifest: Optional[str] = None
    profile: str = "paper"
    seed: int = 0
    workers: Optional[int] = None
    max_models: Optional[int] = None
    # Univariate chain
    n_total: int = 60000
    n_burnin: int = 10000
    grid_size: int = 50
    value_range: tuple[float, float] = (0.0, 5.0)
    tmcmc_scales: tuple[float, ...] = (0.05, 0.05, 0.05, 0.05)
    epsilon_law: str = "half-normal"
    prior_stride: int = 5
    # Posterior summaries
    n_paths: int = 1000
    alpha: float = 0.05
    c: float = 0.01
    # Model selection
    penalty_grid_size: int = 199
    gibbs_iter: int = 100000
    gibbs_burn: int = 10000
    marginal_estimator: str = "posterior"
    marginal_draws: Optional[int] = None
    inclusion_rule: str = "difference"
    # Forecasting
    benchmark_year: int = 2008
    benchmark_halfwidth: float = 0.5
    # Multivariate chain
    mv_n_total: int = 60000
    mv_n_burnin: int = 10000
    mv_grid_size: int = 50
    mv_value_range: tuple[float, float] = (-5.0, 5.0)
    mv_d_block_size: int = 10
    mv_tmcmc_scales: dict[str, float] = field(default_factory=default_mv_scales)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        def _check(ok: bool, message: str) -> None:
            if not ok:
                raise ConfigError(message)

        _check(self.profile in PROFILES, f"unknown profile '{self.profile}'")
        _check(
            self.inclusion_rule in INCLUSION_RULES,
            f"unknown inclusion rule '{self.inclusion_rule}'",
        )
        _check(0 <= self.n_burnin <= self.n_total, "need 0 <= n_burnin <= n_total")
        _check(
            0 <= self.mv_n_burnin <= self.mv_n_total,
            "need 0 <= mv_n_burnin <= mv_n_total",
        )
        _check(0 <= self.gibbs_burn < self.gibbs_iter, "need 0 <= gibbs_burn < gibbs_iter")
        _check(self.grid_size >= 2 and self.mv_grid_size >= 2, "grid sizes must be >= 2")
        _check(self.n_paths >= 1, "n_paths must be at least 1")
        _check(0 < self.alpha < 1, "alpha must lie in (0, 1)")
        _check(self.c > 0, "c must be positive")
        _check(self.penalty_grid_size >= 1, "penalty_grid_size must be at least 1")
        _check(self.prior_stride >= 1, "prior_stride must be at least 1")
        _check(self.mv_d_block_size >= 1, "mv_d_block_size must be at least 1")
        _check(
            len(self.tmcmc_scales) == 4 and all(s > 0 for s in self.tmcmc_scales),
            "tmcmc_scales must hold four positive values",
        )
        _check(
            all(s > 0 for s in self.mv_tmcmc_scales.values()),
            "mv_tmcmc_scales must be positive",
        )
        _check(self.workers is None or self.workers >= 1, "workers must be at least 1")
        _check(
            self.max_models is None or self.max_models >= 1,
            "max_models must be at least 1",
        )
        _check(
            self.marginal_draws is None or self.marginal_draws >= 1,
            "marginal_draws must be at least 1",
        )
        _check(self.benchmark_halfwidth > 0, "benchmark_halfwidth must be positive")

    ##########################################################################
    # Resolution
    ##########################################################################

    def with_profile(self, profile: str) -> "RunConfig":
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile '{profile}'")
        if profile == "paper":
            return dataclasses.replace(self, profile=profile)
        return dataclasses.replace(
            self,
            profile=profile,
            n_total=self.n_total // DESK_CHAIN_DIVISOR,
            n_burnin=self.n_burnin // DESK_CHAIN_DIVISOR,
            mv_n_total=self.mv_n_total // DESK_CHAIN_DIVISOR,
            mv_n_burnin=self.mv_n_burnin // DESK_CHAIN_DIVISOR,
            max_models=DESK_MAX_MODELS,
        )

    def merge(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Apply every override that is not None."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as e:
            raise ConfigError(str(e))

    @staticmethod
    def parse_overrides(value: JsonValue, *, location: Optional[str] = None) -> dict[str, Any]:
        document = parse_dict(value)
        check_known_keys(document, list(_PARSERS), location=location)
        overrides: dict[str, Any] = {}
        for key, item in document.items():
            try:
                overrides[key] = _PARSERS[key](item)
            except TypeError as e:
                raise ConfigError(f"field '{key}': {e}", location=location)
        return overrides

    @staticmethod
    def from_dict(
        value: JsonValue, *, base: Optional["RunConfig"] = None, location: Optional[str] = None
    ) -> "RunConfig":
        overrides = RunConfig.parse_overrides(value, location=location)
        config = base or RunConfig()
        profile = overrides.pop("profile", None)
        if profile is not None:
            config = config.with_profile(profile)
        return config.merge(overrides)

    def to_dict(self) -> JsonValue:
        result: dict[str, JsonValue] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float):
                result[f.name] = asdict_float(value)
            elif isinstance(value, tuple):
                result[f.name] = [asdict_float(v) for v in value]
            elif isinstance(value, dict):
                result[f.name] = {k: asdict_float(v) for k, v in value.items()}
            else:
                result[f.name] = value
        return result


_PARSERS: dict[str, Callable[[JsonValue], Any]] = {
    "scenario": parse_str,
    "manifest": parse_opt(parse_str),
    "profile": parse_choice(*PROFILES),
    "seed": parse_int,
    "workers": parse_opt(parse_int),
    "max_models": parse_opt(parse_int),
    "n_total": parse_int,
    "n_burnin": parse_int,
    "grid_size": parse_int,
    "value_range": _parse_range,
    "tmcmc_scales": _parse_scales,
    "epsilon_law": parse_choice(*EPSILON_LAWS),
    "prior_stride": parse_int,
    "n_paths": parse_int,
    "alpha": parse_float,
    "c": parse_float,
    "penalty_grid_size": parse_int,
    "gibbs_iter": parse_int,
    "gibbs_burn": parse_int,
    "marginal_estimator": parse_choice(*MARGINAL_ESTIMATORS),
    "marginal_draws": parse_opt(parse_int),
    "inclusion_rule": parse_choice(*INCLUSION_RULES),
    "benchmark_year": parse_int,
    "benchmark_halfwidth": parse_float,
    "mv_n_total": parse_int,
    "mv_n_burnin": parse_int,
    "mv_grid_size": parse_int,
    "mv_value_range": _parse_range,
    "mv_d_block_size": parse_int,
    "mv_tmcmc_scales": lambda value: {**default_mv_scales(), **_parse_mv_scales(value)},
}


def load_run_config(
    path: Union[None, str, Path] = None,
    *,
    profile: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Resolve defaults, profile, config file and flag overrides, in that order."""
    file_overrides: dict[str, Any] = {}
    if path is not None:
        try:
            document = read_json(path)
        except FileNotFoundError:
            raise ConfigError("file not found", location=str(path))
        except ValueError as e:
            raise ConfigError(f"invalid JSON: {e}", location=str(path))
        file_overrides = RunConfig.parse_overrides(document, location=str(path))
    chosen = profile or file_overrides.pop("profile", None) or "paper"
    file_overrides.pop("profile", None)
    config = RunConfig().with_profile(chosen)
    config = config.merge(file_overrides)
    config = config.merge(overrides or {})
    _LOGGER.debug(f"Resolved run configuration with profile '{config.profile}'")
    return config
