import math
from collections.abc import Callable, Mapping, Sequence
from typing import Any, Optional, Union

import numpy as np
from typing_extensions import TypeAlias, TypeVar

from ..errors import ConfigError, did_you_mean

_S = TypeVar("_S")
_T = TypeVar("_T")

JsonValue: TypeAlias = Union[
    None,
    bool,
    int,
    float,
    str,
    dict[str, "JsonValue"],
    list["JsonValue"],
]

##############################################################################
# Encoder
##############################################################################


def asdict_opt(asdict: Callable[[_S], _T]) -> Callable[[Optional[_S]], Optional[_T]]:
    def _asdict(value: Optional[_S]) -> Optional[_T]:
        if value is None:
            return None
        else:
            return asdict(value)

    return _asdict


def asdict_float(value: float) -> JsonValue:
    value = float(value)
    if math.isfinite(value):
        # Fixed precision keeps reruns byte-identical across platforms.
        return float(f"{value:.12g}")
    return None


def asdict_array(value: Any) -> JsonValue:
    array = np.asarray(value)
    if array.ndim == 0:
        if np.issubdtype(array.dtype, np.integer):
            return int(array)
        return asdict_float(float(array))
    return [asdict_array(item) for item in array]


##############################################################################
# Decoder
##############################################################################


def parse_value_by_type(*classes: type) -> Callable[[JsonValue], Any]:
    names = " or ".join(cls.__name__ for cls in classes)

    def _parser(value: Any) -> Any:
        # bool is an int subclass, but never a valid number in a config file.
        if isinstance(value, classes) and not (
            isinstance(value, bool) and bool not in classes
        ):
            return value
        raise TypeError(f"Expected {names}, found {type(value).__name__}")

    return _parser


parse_bool: Callable[[JsonValue], bool] = parse_value_by_type(bool)
parse_int: Callable[[JsonValue], int] = parse_value_by_type(int)
parse_str: Callable[[JsonValue], str] = parse_value_by_type(str)
parse_list: Callable[[JsonValue], list[JsonValue]] = parse_value_by_type(list)
parse_dict: Callable[[JsonValue], dict[str, JsonValue]] = parse_value_by_type(dict)


def parse_float(value: JsonValue) -> float:
    return float(parse_value_by_type(int, float)(value))


def parse_list_of(parser: Callable[[JsonValue], _T]) -> Callable[[JsonValue], list[_T]]:
    return lambda value: list(map(parser, parse_list(value)))


def parse_opt(parser: Callable[[JsonValue], _T]) -> Callable[[JsonValue], Optional[_T]]:
    def _parser(value: JsonValue) -> Optional[_T]:
        if value is None:
            return None
        else:
            return parser(value)

    return _parser


def parse_choice(*options: str) -> Callable[[JsonValue], str]:
    def _parser(value: JsonValue) -> str:
        text = parse_str(value)
        if text not in options:
            hint = did_you_mean(text, options)
            raise TypeError(
                f"Expected one of {', '.join(options)}, found '{text}'"
                + (f" {hint}" if hint else "")
            )
        return text

    return _parser


def parse_field(
    name: str, parser: Callable[[JsonValue], _T]
) -> Callable[[JsonValue], _T]:
    def _parser(value: JsonValue) -> _T:
        value = parse_dict(value)
        try:
            return parser(value[name])
        except TypeError as e:
            raise TypeError(f"Error when checking type for field {name}. {e}")

    return _parser


def parse_optfield(
    name: str, parser: Callable[[JsonValue], _T]
) -> Callable[[JsonValue], Optional[_T]]:
    def _parser(value: JsonValue) -> Optional[_T]:
        try:
            return parse_field(name, parse_opt(parser))(value)
        except KeyError:
            return None

    return _parser


def parse_array(value: JsonValue) -> np.ndarray:
    def _nested(item: JsonValue) -> Any:
        if isinstance(item, list):
            return [_nested(x) for x in item]
        if item is None:
            return math.nan
        return parse_float(item)

    return np.asarray(_nested(value), dtype=float)


def check_known_keys(
    value: Mapping[str, JsonValue],
    known: Sequence[str],
    *,
    location: Optional[str] = None,
) -> None:
    for key in value:
        if key not in known:
            hint = did_you_mean(key, known)
            raise ConfigError(
                f"unknown key '{key}'" + (f" {hint}" if hint else ""),
                location=location,
            )
