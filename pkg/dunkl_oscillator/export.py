"""CSV and JSON writers for command output."""
import csv
import json
import logging
import math
import sys
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np

from . import config


def format_float(value):
    if value is None:
        return ''
    value = float(value)
    if math.isnan(value):
        return 'nan'
    return format(value, config.CSV_FLOAT_FORMAT)


def _format_cell(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format_float(value)


def _open_target(path):
    if path is None:
        return sys.stdout, False
    return open(path, 'w', newline=''), True


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: Optional[str] = None):
    """Header row plus rows; floats in round-trip decimal form. Writes to stdout when path is None."""
    handle, owned = _open_target(path)
    try:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
            count += 1
    finally:
        if owned:
            handle.close()
    logging.info(f"Wrote {count} CSV rows to {path or 'stdout'}")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def _clean(obj):
    """Replace non-finite floats with None so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (float, np.floating)) and not math.isfinite(float(obj)):
        return None
    return obj


def write_json(payload: Any, path: Optional[str] = None):
    handle, owned = _open_target(path)
    try:
        json.dump(_clean(payload), handle, default=_json_default, indent=2, sort_keys=True)
        handle.write('\n')
    finally:
        if owned:
            handle.close()
    logging.info(f"Wrote JSON to {path or 'stdout'}")


def scan_rows(scan) -> Iterable[Sequence[Any]]:
    return zip(scan.k_list, scan.per_k_values)


def coeff_rows(coeffs) -> Iterable[Sequence[Any]]:
    return enumerate(np.asarray(coeffs, dtype=float))


def rule_rows(rule) -> Iterable[Sequence[Any]]:
    return ((i + 1, x, w) for i, (x, w) in enumerate(zip(rule.nodes, rule.weights)))


def table_payload(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Dict[str, list]:
    """Column-oriented dict for JSON output of a CSV-shaped table."""
    rows = [list(r) for r in rows]
    return {name: [r[i] for r in rows] for i, name in enumerate(header)}
