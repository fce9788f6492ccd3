import csv
import io
import math
from typing import Any, Dict, Iterable, Sequence

import numpy as np

CSV_DIGITS = 15


def matrix_to_json(matrix: np.ndarray) -> Dict[str, Any]:
    """Dense complex matrix as ``{n, rows: [[[re, im], ...], ...]}``."""
    values = np.asarray(matrix, dtype=complex)
    return {
        "n": int(values.shape[0]),
        "rows": [[[float(entry.real), float(entry.imag)] for entry in row] for row in values],
    }


def matrix_to_triplets(matrix: np.ndarray, tol: float = 0.0) -> str:
    """Coordinate listing in the MatrixMarket spirit, 1-based, nonzeros only."""
    values = np.asarray(matrix, dtype=complex)
    entries = [(i, j, values[i, j]) for i, j in zip(*np.nonzero(np.abs(values) > tol))]
    lines = ["%%MatrixMarket matrix coordinate complex general",
             f"{values.shape[0]} {values.shape[1]} {len(entries)}"]
    lines += [f"{i + 1} {j + 1} {format_number(v.real)} {format_number(v.imag)}" for i, j, v in entries]
    return "\n".join(lines) + "\n"


def format_number(value: float) -> str:
    if math.isnan(value) or math.isinf(value):
        return str(value)
    return f"{value:.{CSV_DIGITS}g}"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(cell) if isinstance(cell, float) else cell for cell in row])
    return buffer.getvalue()
