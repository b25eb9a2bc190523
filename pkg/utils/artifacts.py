import os
import sys
import json
import shutil
import tempfile
from typing import Any, Callable, Dict, Optional

import numpy as np
import pandas as pd

from runtime.config import logger
from runtime.errors import ConfigurationError
from runtime.manifest import RunManifest

STDOUT = "-"


def sanitize_excel_data(value) -> Any:
    """Sanitize data to prevent Excel formula interpretation"""
    if isinstance(value, str):
        if value.startswith(('=', '+', '-', '@')):
            return "'" + value
    return value


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def _move_into_place(path: str, suffix: str, write: Callable[[str], None]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with tempfile.NamedTemporaryFile(delete=False, suffix=suffix, dir=directory) as tmp:
        tmp_path = tmp.name
    try:
        write(tmp_path)
        shutil.move(tmp_path, path)
    finally:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)


def write_json(payload: Dict[str, Any], path: str, manifest: Optional[RunManifest] = None) -> Dict[str, Any]:
    """Write `payload` with the manifest under `meta`; `-` prints to stdout."""
    document = dict(payload)
    if manifest is not None:
        document["meta"] = {**manifest.to_dict(), **document.get("meta", {})}
    text = json.dumps(_jsonable(document), indent=2, sort_keys=True)
    if path == STDOUT:
        sys.stdout.write(text + "\n")
        sys.stdout.flush()
        return document

    def write(tmp_path: str) -> None:
        with open(tmp_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")

    _move_into_place(path, ".json", write)
    logger.info(f"✅ Wrote {path}")
    return document


def read_json(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigurationError(f"input file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"could not parse {path}: {e}")


def manifest_path(path: str) -> str:
    return f"{path}.manifest.json"


def write_csv(frame: pd.DataFrame, path: str, manifest: Optional[RunManifest] = None) -> None:
    """Write a table as CSV plus a `<file>.manifest.json` sidecar."""
    if path == STDOUT:
        frame.to_csv(sys.stdout, index=False)
        sys.stdout.flush()
        return
    _move_into_place(path, ".csv", lambda tmp_path: frame.to_csv(tmp_path, index=False))
    if manifest is not None:
        write_json({"meta": manifest.to_dict()}, manifest_path(path))
    logger.info(f"✅ Wrote {len(frame)} rows to {path}")


def read_csv(path: str, required: tuple) -> pd.DataFrame:
    if not os.path.exists(path):
        raise ConfigurationError(f"input file not found: {path}")
    frame = pd.read_csv(path)
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ConfigurationError(f"{os.path.basename(path)} is missing columns {missing}; expected {list(required)}")
    return frame


def write_excel(frame: pd.DataFrame, path: str) -> str:
    logger.info(f"📝 Saving {len(frame)} rows to Excel...")
    clean = frame.copy()
    for column in clean.columns:
        if clean[column].dtype == object:
            clean[column] = clean[column].map(sanitize_excel_data)
    _move_into_place(path, ".xlsx", lambda tmp_path: clean.to_excel(tmp_path, index=False))
    logger.info(f"✅ Saved {len(frame)} rows to {path}")
    return path
