from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from typing_extensions import final

from .._util.logging import getLogger
from .._util.progress_bar import ChainProgress
from .._util.serialise import (
    JsonValue,
    asdict_array,
    asdict_float,
    parse_array,
    parse_dict,
    parse_field,
    parse_float,
    parse_int,
    parse_list_of,
    parse_str,
)
from ..config import MV_BLOCKS as BLOCKS, default_mv_scales
from ..emulator import (
    DataSegment,
    DesignGrid,
    LookupTable,
    Seed,
    SegmentTerms,
    as_generator,
    segment_terms,
)
from ..errors import ChainMismatch, CholeskyFailure, ConfigError, EmptyChain
from ..sampler import tmcmc_step
from ..sampler.tmcmc import EPSILON_LAWS
from .dynamics import MvLookupTable, mv_lookup_log_density, mv_path_log_likelihood
from .params import MvGpParams, MvPriorConfig, cholesky, sample_matrix_normal

_LOGGER = getLogger(__name__)


@final
@dataclass(frozen=True)
class MvChainConfig:
    n_total: int = 60000
    n_burnin: int = 10000
    d_block_size: int = 10
    scales: dict[str, float] = field(default_factory=default_mv_scales)
    epsilon_law: str = "half-normal"

    def __post_init__(self) -> None:
        if self.n_total < 0 or not 0 <= self.n_burnin <= self.n_total:
            raise ConfigError(
                f"chain needs 0 <= n_burnin <= n_total, "
                f"found {self.n_burnin} and {self.n_total}"
            )
        if self.d_block_size < 1:
            raise ConfigError("d_block_size must be at least 1")
        if self.epsilon_law not in EPSILON_LAWS:
            raise ConfigError(f"unknown epsilon law '{self.epsilon_law}'")
        scales = {**default_mv_scales(), **self.scales}
        if any(not scale > 0 for scale in scales.values()):
            raise ConfigError(f"TMCMC scales must be positive, found {scales}")
        object.__setattr__(self, "scales", scales)


##############################################################################
# State
##############################################################################


@final
@dataclass(frozen=True)
class MvState:
    params: MvGpParams
    table: MvLookupTable
    terms: SegmentTerms
    log_post: float


def mv_log_posterior(
    params: MvGpParams,
    table: MvLookupTable,
    terms: SegmentTerms,
    segment: DataSegment,
    prior: MvPriorConfig,
) -> float:
    return (
        prior.log_prior(params)
        + mv_lookup_log_density(table, params)
        + mv_path_log_likelihood(segment, table, params, terms=terms)
    )


def chol_to_theta(C: np.ndarray) -> np.ndarray:
    """Log diagonal followed by the strictly lower entries of a Cholesky factor."""
    K = C.shape[0]
    return np.concatenate([np.log(np.diag(C)), C[np.tril_indices(K, -1)]])


def theta_to_chol(theta: np.ndarray, K: int) -> np.ndarray:
    C = np.zeros((K, K))
    C[np.diag_indices(K)] = np.exp(theta[:K])
    C[np.tril_indices(K, -1)] = theta[K:]
    return C


def chol_log_jacobian(C: np.ndarray) -> float:
    """
    Log Jacobian of theta -> C C'.

    The map C -> C C' contributes prod_i C_ii^(K - i + 1), up to a constant,
    and the log diagonal contributes prod_i C_ii.
    """
    K = C.shape[0]
    weights = np.arange(K, 0, -1) + 1
    return float(np.sum(weights * np.log(np.diag(C))))


def mv_initial_state(
    segment: DataSegment,
    prior: MvPriorConfig,
    grid: DesignGrid,
    rng: np.random.Generator,
) -> MvState:
    params = prior.initial_params()
    table = LookupTable.build(grid, np.zeros((grid.n, params.K)), params.r)
    D = sample_matrix_normal(
        grid.H @ params.B, table.chol, cholesky(params.Sigma_f, "Sigma_f"), rng
    )
    table = table.with_d(D)
    terms = segment_terms(segment, table)
    return MvState(
        params=params,
        table=table,
        terms=terms,
        log_post=mv_log_posterior(params, table, terms, segment, prior),
    )


##############################################################################
# Block moves
##############################################################################


class _Moves:
    """TMCMC block moves sharing one segment, prior, configuration and stream."""

    def __init__(
        self,
        segment: DataSegment,
        prior: MvPriorConfig,
        config: MvChainConfig,
        rng: np.random.Generator,
    ) -> None:
        self.segment = segment
        self.prior = prior
        self.config = config
        self.rng = rng
        self.accepted = {name: 0 for name in BLOCKS}
        self.proposed = {name: 0 for name in BLOCKS}
        self.cholesky_rejections = {"Sigma_f": 0, "Sigma_eps": 0}

    def _move(
        self,
        state: MvState,
        block: str,
        x: np.ndarray,
        build: Callable[[np.ndarray], MvState],
        *,
        positive: bool = False,
        offset: Callable[[np.ndarray], float] = lambda _: 0.0,
    ) -> MvState:
        candidates: dict[bytes, MvState] = {}

        def _log_target(proposal: np.ndarray) -> float:
            try:
                candidate = build(proposal)
            except CholeskyFailure:
                if block in self.cholesky_rejections:
                    self.cholesky_rejections[block] += 1
                raise
            candidates[proposal.tobytes()] = candidate
            return candidate.log_post + offset(proposal)

        x, _, accepted = tmcmc_step(
            x,
            state.log_post + offset(x),
            _log_target,
            self.config.scales[block],
            self.rng,
            self.config.epsilon_law,
            positive=positive,
        )
        self.proposed[block] += 1
        if accepted:
            self.accepted[block] += 1
            return candidates[x.tobytes()]
        return state

    def _state(self, params: MvGpParams, table: MvLookupTable, terms: SegmentTerms) -> MvState:
        log_post = mv_log_posterior(params, table, terms, self.segment, self.prior)
        return MvState(params, table, terms, log_post)

    def update_B(self, state: MvState) -> MvState:
        shape = state.params.B.shape

        def _build(x: np.ndarray) -> MvState:
            params = state.params.replace(B=x.reshape(shape))
            return self._state(params, state.table, state.terms)

        return self._move(state, "B", state.params.B.ravel(), _build)

    def update_D(self, state: MvState, rows: np.ndarray) -> MvState:
        K = state.params.K

        def _build(x: np.ndarray) -> MvState:
            D = state.table.d.copy()
            D[rows] = x.reshape(len(rows), K)
            return self._state(state.params, state.table.with_d(D), state.terms)

        return self._move(state, "D", state.table.d[rows].ravel(), _build)

    def update_r(self, state: MvState) -> MvState:
        def _build(x: np.ndarray) -> MvState:
            params = state.params.replace(r=x)
            table = state.table.with_r(x)
            return self._state(params, table, segment_terms(self.segment, table))

        return self._move(state, "r", state.params.r, _build, positive=True)

    def update_covariance(self, state: MvState, name: str) -> MvState:
        K = state.params.K
        current = cholesky(getattr(state.params, name), name)

        def _build(theta: np.ndarray) -> MvState:
            C = theta_to_chol(theta, K)
            Sigma = C @ C.T
            # Proposals that are numerically singular count as leaving the cone.
            cholesky(Sigma, name)
            params = state.params.replace(**{name: Sigma})
            return self._state(params, state.table, state.terms)

        def _jacobian(theta: np.ndarray) -> float:
            return chol_log_jacobian(theta_to_chol(theta, K))

        return self._move(state, name, chol_to_theta(current), _build, offset=_jacobian)

    def sweep(self, state: MvState) -> MvState:
        state = self.update_B(state)
        n = state.table.grid.n
        for start in range(0, n, self.config.d_block_size):
            rows = np.arange(start, min(start + self.config.d_block_size, n))
            state = self.update_D(state, rows)
        state = self.update_r(state)
        state = self.update_covariance(state, "Sigma_f")
        state = self.update_covariance(state, "Sigma_eps")
        return state

    def acceptance_rates(self) -> dict[str, float]:
        return {
            name: self.accepted[name] / self.proposed[name] if self.proposed[name] else 0.0
            for name in BLOCKS
        }


##############################################################################
# Chain
##############################################################################


@final
@dataclass(frozen=True)
class MvChainOutput:
    grid: DesignGrid
    B: np.ndarray
    D: np.ndarray
    Sigma_f: np.ndarray
    Sigma_eps: np.ndarray
    r: np.ndarray
    log_post: np.ndarray
    n_total: int
    n_burnin: int
    acceptance_rates: dict[str, float] = field(default_factory=dict)
    cholesky_rejections: dict[str, int] = field(default_factory=dict)
    fingerprint: str = ""
    labels: tuple[str, ...] = ()

    def __len__(self) -> int:
        return int(self.log_post.shape[0])

    @property
    def K(self) -> int:
        return int(self.B.shape[2])

    def params(self, i: int) -> MvGpParams:
        return MvGpParams(
            B=self.B[i], Sigma_f=self.Sigma_f[i], Sigma_eps=self.Sigma_eps[i], r=self.r[i]
        )

    def draw(self, i: int) -> tuple[MvGpParams, MvLookupTable]:
        params = self.params(i)
        return params, LookupTable.build(self.grid, self.D[i], params.r)

    def positions(self, m: int) -> np.ndarray:
        if len(self) == 0:
            raise EmptyChain("multivariate chain")
        return np.rint(np.linspace(0, len(self) - 1, m)).astype(int)

    def require_segment(self, segment: DataSegment) -> None:
        if self.fingerprint != segment.fingerprint:
            raise ChainMismatch(
                expected=f"segment {segment.label or segment.fingerprint}",
                found=f"segment {self.fingerprint or 'unknown'}",
            )

    def summary(self) -> JsonValue:
        parameters: dict[str, JsonValue] = {}
        if len(self) > 0:
            for name, values in (
                ("Sigma_f", self.Sigma_f),
                ("Sigma_eps", self.Sigma_eps),
                ("r", self.r),
            ):
                parameters[name] = {
                    "mean": asdict_array(values.mean(axis=0)),
                    "lower": asdict_array(np.quantile(values, 0.025, axis=0)),
                    "upper": asdict_array(np.quantile(values, 0.975, axis=0)),
                }
        return {
            "dim": self.K,
            "labels": list(self.labels),
            "draws": len(self),
            "n_total": self.n_total,
            "n_burnin": self.n_burnin,
            "acceptance_rates": {
                name: asdict_float(rate) for name, rate in self.acceptance_rates.items()
            },
            "cholesky_rejections": dict(self.cholesky_rejections),
            "parameters": parameters,
        }

    def to_dict(self) -> JsonValue:
        return {
            "dim": self.K,
            "labels": list(self.labels),
            "fingerprint": self.fingerprint,
            "n_total": self.n_total,
            "n_burnin": self.n_burnin,
            "grid": self.grid.to_dict(),
            "acceptance_rates": {
                name: asdict_float(rate) for name, rate in self.acceptance_rates.items()
            },
            "cholesky_rejections": dict(self.cholesky_rejections),
            "draws": [
                {
                    "B": asdict_array(self.B[i]),
                    "D": asdict_array(self.D[i]),
                    "Sigma_f": asdict_array(self.Sigma_f[i]),
                    "Sigma_eps": asdict_array(self.Sigma_eps[i]),
                    "r": asdict_array(self.r[i]),
                    "log_post": asdict_float(self.log_post[i]),
                }
                for i in range(len(self))
            ],
        }

    @staticmethod
    def from_dict(value: JsonValue) -> "MvChainOutput":
        grid_value = parse_field("grid", parse_dict)(value)
        grid = DesignGrid(
            points=parse_field("points", parse_array)(grid_value),
            seed=parse_field("seed", parse_int)(grid_value),
        )
        draws = parse_field("draws", parse_list_of(parse_dict))(value)
        K = parse_field("dim", parse_int)(value)
        m, n = K + 2, grid.n

        def _stack(name: str, shape: tuple[int, ...]) -> np.ndarray:
            if not draws:
                return np.empty((0, *shape))
            return np.stack([parse_field(name, parse_array)(draw) for draw in draws])

        return MvChainOutput(
            grid=grid,
            B=_stack("B", (m, K)),
            D=_stack("D", (n, K)),
            Sigma_f=_stack("Sigma_f", (K, K)),
            Sigma_eps=_stack("Sigma_eps", (K, K)),
            r=_stack("r", (K + 1,)),
            log_post=np.array(
                [parse_field("log_post", parse_array)(draw) for draw in draws], dtype=float
            ),
            n_total=parse_field("n_total", parse_int)(value),
            n_burnin=parse_field("n_burnin", parse_int)(value),
            acceptance_rates={
                name: parse_float(rate)
                for name, rate in parse_field("acceptance_rates", parse_dict)(value).items()
            },
            cholesky_rejections={
                name: parse_int(count)
                for name, count in parse_field("cholesky_rejections", parse_dict)(
                    value
                ).items()
            },
            fingerprint=parse_field("fingerprint", parse_str)(value),
            labels=tuple(parse_field("labels", parse_list_of(parse_str))(value)),
        )


def _empty_mv_output(grid: DesignGrid, n: int, K: int) -> dict[str, np.ndarray]:
    return {
        "B": np.empty((n, K + 2, K)),
        "D": np.empty((n, grid.n, K)),
        "Sigma_f": np.empty((n, K, K)),
        "Sigma_eps": np.empty((n, K, K)),
        "r": np.empty((n, K + 1)),
        "log_post": np.empty(n),
    }


def _store(out: dict[str, np.ndarray], i: int, state: MvState) -> None:
    out["B"][i] = state.params.B
    out["D"][i] = state.table.d
    out["Sigma_f"][i] = state.params.Sigma_f
    out["Sigma_eps"][i] = state.params.Sigma_eps
    out["r"][i] = state.params.r
    out["log_post"][i] = state.log_post


def mv_run_chain(
    segment: DataSegment,
    prior: MvPriorConfig,
    grid: DesignGrid,
    config: Optional[MvChainConfig] = None,
    seed: Seed = None,
    *,
    labels: Sequence[str] = (),
    show_progress: bool = False,
) -> MvChainOutput:
    """
    Sample the matrix-variate emulator given a K-dimensional segment.

    Every block moves by additive TMCMC: B in one block, D in row chunks,
    r on the log scale, and each covariance through its Cholesky factor.
    A run with no iterations returns the initial state as its only draw.
    """
    config = config or MvChainConfig()
    rng = as_generator(seed)
    state = mv_initial_state(segment, prior, grid, rng)
    moves = _Moves(segment, prior, config, rng)
    n_kept = config.n_total - config.n_burnin if config.n_total > 0 else 1
    out = _empty_mv_output(grid, n_kept, prior.K)
    if config.n_total == 0:
        _store(out, 0, state)
    bar = ChainProgress(
        config.n_total, config.n_burnin, show=show_progress, prefix="ensemble"
    )
    for it in range(config.n_total):
        state = moves.sweep(state)
        if it >= config.n_burnin:
            _store(out, it - config.n_burnin, state)
        bar.step(moves.accepted["r"])
    rates = moves.acceptance_rates()
    _LOGGER.info(
        f"Multivariate chain: {n_kept} draws kept, acceptance "
        + ", ".join(f"{name} {rate:.3f}" for name, rate in rates.items())
        + f"; rejected non-PD proposals {moves.cholesky_rejections}"
    )
    return MvChainOutput(
        grid=grid,
        n_total=config.n_total,
        n_burnin=config.n_burnin,
        acceptance_rates=rates,
        cholesky_rejections=dict(moves.cholesky_rejections),
        fingerprint=segment.fingerprint,
        labels=tuple(labels),
        **out,
    )
