"""
Output Utility Module

This module handles everything LambQ writes to disk: the output directory
resolution, CSV tables with a fixed float format and JSON reports.

Classes:
    ReportEncoder: JSON encoder for dataclass reports, enums and numpy values

Functions:
    resolve_output_dir: Pick the output directory from flag, environment or default
    write_csv: Write a table of named columns to CSV
    write_json: Write a report object to JSON
    report_to_dict: Convert a report into plain Python types
"""

import dataclasses
import json
import logging
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

# Environment variable consulted when no --out flag is given
OUTPUT_ENV_VAR = "LAMBQ_OUT"
DEFAULT_OUTPUT_DIR = "lambq_out"
# 17 significant digits round-trip every double exactly
CSV_FLOAT_FORMAT = "%.17g"
JSON_INDENT = 2

logger = logging.getLogger(__name__)


class ReportEncoder(json.JSONEncoder):
    """
    JSON encoder for LambQ report objects.

    Handles dataclasses (encoded field by field), Enum members (their value),
    numpy arrays and scalars, and paths.
    """

    def default(self, obj):
        """
        Convert objects the stock encoder does not know about.

        Args:
            obj: The object to serialize

        Returns:
            A JSON-compatible representation of the object

        Raises:
            TypeError: If the object cannot be serialized (delegated to parent class)
        """
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


def resolve_output_dir(cli_value: Optional[str] = None) -> Path:
    """
    Resolve the directory output files are written to.

    The --out flag wins, then the LAMBQ_OUT environment variable, then
    ./lambq_out. The directory is not created here.

    Args:
        cli_value: Value of the --out flag, if given

    Returns:
        The output directory as a Path.
    """
    if cli_value:
        return Path(cli_value)
    env_value = os.environ.get(OUTPUT_ENV_VAR)
    if env_value:
        logger.debug(f"Output directory taken from {OUTPUT_ENV_VAR}: {env_value}")
        return Path(env_value)
    return Path(DEFAULT_OUTPUT_DIR)


def write_csv(columns: Union[Mapping[str, Sequence[Any]], pd.DataFrame], path: Union[str, Path]) -> Path:
    """
    Write named columns to a CSV file with 17-significant-digit floats.

    Column order follows the mapping order, so headers come out exactly as
    given by the caller.

    Args:
        columns: Mapping of column name to values, or a ready DataFrame
        path: Destination file

    Returns:
        The path written.

    Raises:
        IOError: If the file cannot be written
    """
    frame = columns if isinstance(columns, pd.DataFrame) else pd.DataFrame(dict(columns))
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        raise IOError(f"Failed to write CSV file {path}: {e}") from e
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(report: Any, path: Union[str, Path]) -> Path:
    """
    Write a report (dataclass, dict or list) to JSON with sorted keys.

    Args:
        report: Object to serialize
        path: Destination file

    Returns:
        The path written.

    Raises:
        IOError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(report, f, cls=ReportEncoder, indent=JSON_INDENT, sort_keys=True)
            f.write("\n")
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        raise IOError(f"Failed to write JSON file {path}: {e}") from e
    logger.info(f"Wrote report to {path}")
    return path


def report_to_dict(report: Any) -> Dict[str, Any]:
    """Round-trip a report through ReportEncoder into plain Python types."""
    return json.loads(json.dumps(report, cls=ReportEncoder))
