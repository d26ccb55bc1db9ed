import json
import os
import tempfile
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any, Union

import pandas as pd

from .logging import getLogger
from .serialise import JsonValue

_LOGGER = getLogger(__name__)


def _replace_atomically(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        os.unlink(tmp_name)
        raise


def write_json(path: Union[str, Path], value: JsonValue) -> Path:
    path = Path(path)
    text = json.dumps(value, indent=2, sort_keys=True, allow_nan=False)
    _replace_atomically(path, text + "\n")
    _LOGGER.info(f"Wrote {path}")
    return path


def read_json(path: Union[str, Path]) -> JsonValue:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)  # type: ignore[no-any-return]


def write_csv(
    path: Union[str, Path],
    rows: Union[pd.DataFrame, Sequence[Mapping[str, Any]]],
    columns: Sequence[str] = (),
) -> Path:
    path = Path(path)
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
    if columns:
        frame = frame.reindex(columns=list(columns))
    _replace_atomically(path, frame.to_csv(index=False, float_format="%.10g"))
    _LOGGER.info(f"Wrote {path}")
    return path


def write_text(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    _replace_atomically(path, text)
    _LOGGER.info(f"Wrote {path}")
    return path
