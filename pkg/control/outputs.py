"""
Artifact writers. CSV files carry 15 significant digits and LF line endings;
identical inputs give identical bytes.
"""
import json
import math
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from core_engine.errors import OutputError
from core_engine.sim.integrator import Trajectory

PathLike = Union[str, Path]


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create directory {path.parent}: {e}")
    return path


def write_dataframe_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    path = _prepare(path)
    try:
        frame.to_csv(path, index=False, float_format='%.15g', lineterminator='\n')
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}")
    return path


def write_trajectory_csv(traj: Trajectory, path: PathLike) -> Path:
    """Header ``t,<species...>`` (controller last), one row per sample."""
    return write_dataframe_csv(traj.to_dataframe(), path)


def to_jsonable(value):
    """Plain JSON types; non-finite floats become strings, complex numbers [re, im]."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(float(value.real)), to_jsonable(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if isinstance(value, Path):
        return str(value)
    return value


def write_summary(summary: Dict, path: PathLike) -> Path:
    path = _prepare(path)
    text = json.dumps(to_jsonable(summary), indent=2)
    return write_text(text + '\n', path)


def write_text(text: str, path: PathLike) -> Path:
    path = _prepare(path)
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}")
    return path
