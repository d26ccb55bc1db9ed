from collections.abc import Sequence
from dataclasses import dataclass, field, fields
from typing import Any, ClassVar, Optional

import editdistance

##############################################################################
# Base classes
##############################################################################

EXIT_INPUT_ERROR = 2
EXIT_CHAIN_FAILURE = 3
EXIT_MODE_MISUSE = 4


class ClimdynError(Exception):
    """Base class for every error raised by climdyn."""

    exit_code: ClassVar[int] = EXIT_INPUT_ERROR

    def __reduce__(self) -> tuple[Any, ...]:
        # Dataclass exceptions do not populate args, which pickling relies on.
        return (self.__class__, tuple(getattr(self, f.name) for f in fields(self)))


class InputError(ClimdynError):
    exit_code: ClassVar[int] = EXIT_INPUT_ERROR


class ChainFailure(ClimdynError):
    exit_code: ClassVar[int] = EXIT_CHAIN_FAILURE


def did_you_mean(name: str, known: Sequence[str], limit: int = 3) -> Optional[str]:
    if not known:
        return None

    def _distance(known_name: str) -> int:
        return int(editdistance.eval(name, known_name))

    closest = sorted(known, key=_distance)[:limit]
    return "(Did you mean " + ", ".join(f"'{n}'" for n in closest) + "?)"


##############################################################################
# Ingestion
##############################################################################


@dataclass
class EmptySeries(InputError):
    label: str

    def __str__(self) -> str:
        return f"Series '{self.label}' has no values"


@dataclass
class MissingValues(InputError):
    label: str
    location: str
    years: Sequence[int] = field(default_factory=tuple)

    def __str__(self) -> str:
        years = ", ".join(map(str, list(self.years)[:10]))
        return f"{self.location}: series '{self.label}' is missing years {years}"


@dataclass
class NonPositiveTemperature(InputError):
    label: str
    year: int
    celsius: float

    def __str__(self) -> str:
        return (
            f"Series '{self.label}' converts to {self.celsius:g} °C in {self.year}; "
            f"the log transform needs a positive temperature"
        )


@dataclass
class UnknownUnit(InputError):
    unit: str
    known: Sequence[str]
    location: Optional[str] = None

    def __str__(self) -> str:
        buffer = []
        if self.location:
            buffer.append(f"{self.location}:")
        buffer.append(f"unknown unit '{self.unit}'")
        hint = did_you_mean(self.unit, self.known)
        if hint:
            buffer.append(hint)
        return " ".join(buffer)


@dataclass
class UnknownRole(InputError):
    role: str
    known: Sequence[str]
    location: Optional[str] = None

    def __str__(self) -> str:
        buffer = []
        if self.location:
            buffer.append(f"{self.location}:")
        buffer.append(f"unknown role '{self.role}'")
        hint = did_you_mean(self.role, self.known)
        if hint:
            buffer.append(hint)
        return " ".join(buffer)


@dataclass
class ZeroStride(InputError):
    stride: int

    def __str__(self) -> str:
        return f"Thinning stride must be at least 1, found {self.stride}"


@dataclass
class MisalignedModels(InputError):
    ranges: Sequence[tuple[str, int, int]]

    def __str__(self) -> str:
        return "\n".join(
            [
                "Model series must share one year range:",
                *[f"- {label}: {start}-{end}" for label, start, end in self.ranges],
            ]
        )


@dataclass
class NoOverlap(InputError):
    observed: tuple[int, int]
    models: tuple[int, int]

    def __str__(self) -> str:
        return (
            f"Observed years {self.observed[0]}-{self.observed[1]} do not overlap "
            f"model years {self.models[0]}-{self.models[1]}, "
            f"or the observed series starts after the models"
        )


@dataclass
class ManifestError(InputError):
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass
class ConfigError(InputError):
    message: str
    location: Optional[str] = None

    def __str__(self) -> str:
        if self.location:
            return f"{self.location}: {self.message}"
        return self.message


##############################################################################
# Emulator
##############################################################################


@dataclass
class SeriesTooShort(InputError):
    length: int
    stride: int

    def __str__(self) -> str:
        return (
            f"A series of length {self.length} thinned by {self.stride} "
            f"leaves fewer than 2 points"
        )


@dataclass
class DegenerateRange(InputError):
    low: float
    high: float

    def __str__(self) -> str:
        return f"Grid range [{self.low}, {self.high}] is degenerate"


@dataclass
class NonPositiveSmoothness(InputError):
    r: Sequence[float]

    def __str__(self) -> str:
        return f"Smoothness parameters must be positive, found {list(self.r)}"


@dataclass
class SingularCorrelation(ChainFailure):
    n: int
    r: Sequence[float]

    def __str__(self) -> str:
        return (
            f"The {self.n}x{self.n} correlation matrix is not positive definite "
            f"for r = {list(self.r)}; grid points are too close for this smoothness"
        )


@dataclass
class StaleCache(ChainFailure):
    table_r: Sequence[float]
    params_r: Sequence[float]

    def __str__(self) -> str:
        return (
            f"Look-up table caches were built for r = {list(self.table_r)} "
            f"but the parameters carry r = {list(self.params_r)}"
        )


@dataclass
class NonFiniteLikelihood(ChainFailure):
    index: int
    variance: float

    def __str__(self) -> str:
        return f"Step {self.index} has non-positive variance {self.variance:g}"


##############################################################################
# Sampler
##############################################################################


@dataclass
class SingularPrecision(ChainFailure):
    block: str

    def __str__(self) -> str:
        return f"Full-conditional precision of {self.block} is not positive definite"


@dataclass
class CholeskyFailure(ChainFailure):
    matrix: str

    def __str__(self) -> str:
        return f"Proposed {self.matrix} is not positive definite"


@dataclass
class EmptyChain(InputError):
    label: str = "chain"

    def __str__(self) -> str:
        return f"{self.label} holds no retained draws"


@dataclass
class ChainMismatch(InputError):
    expected: str
    found: str

    def __str__(self) -> str:
        return f"Chain was conditioned on {self.found}, not on {self.expected}"


@dataclass
class NonFinitePaths(ChainFailure):
    origin: str

    def __str__(self) -> str:
        return f"Simulated {self.origin} trajectories contain non-finite values"


##############################################################################
# Posterior summaries
##############################################################################


@dataclass
class MeshTooNarrow(InputError):
    low: float
    high: float
    draw_low: float
    draw_high: float

    def __str__(self) -> str:
        return (
            f"Mesh [{self.low:g}, {self.high:g}] does not cover "
            f"draws in [{self.draw_low:g}, {self.draw_high:g}]"
        )


@dataclass
class NonPositiveC(InputError):
    c: float

    def __str__(self) -> str:
        return f"Discrepancy constant c must be positive, found {self.c:g}"


@dataclass
class AxisMismatch(InputError):
    expected: int
    found: int

    def __str__(self) -> str:
        return f"Expected {self.expected} time indices, found {self.found}"


##############################################################################
# Model selection
##############################################################################


@dataclass
class NonFiniteMarginal(InputError):
    values: Sequence[float]

    def __str__(self) -> str:
        return f"Log marginal densities must be finite, found {list(self.values)}"


@dataclass
class OutOfRange(InputError):
    name: str
    value: float

    def __str__(self) -> str:
        return f"{self.name} must lie in [0, 1], found {self.value:g}"


@dataclass
class EmptyGrid(InputError):
    def __str__(self) -> str:
        return "Penalty grid is empty or not strictly increasing in (0, 1)"


@dataclass
class ModelPipelineFailure(ChainFailure):
    model: str
    cause: str

    def __str__(self) -> str:
        return f"Pipeline for model '{self.model}' failed: {self.cause}"


##############################################################################
# CLI
##############################################################################


@dataclass
class ModeMisuse(ClimdynError):
    exit_code: ClassVar[int] = EXIT_MODE_MISUSE

    mode: str
    reason: str

    def __str__(self) -> str:
        return f"Mode '{self.mode}' {self.reason}"
