"""Columnar run traces, written out as plain CSV."""

from __future__ import annotations

import csv
import io
from typing import Dict, Sequence

import numpy as np

from .errors import ValidationError


class Trace:
    """Step-indexed record of a run: named columns of equal length.

    Booleans are stored and emitted as 0/1 so the CSV stays typable.
    """

    def __init__(self, columns: Dict[str, Sequence]):
        if not columns:
            raise ValidationError("Trace: need at least one column")
        arrays = {}
        length = None
        for name, values in columns.items():
            arr = np.asarray(values)
            if arr.dtype == bool:
                arr = arr.astype(np.int8)
            if length is None:
                length = arr.shape[0]
            elif arr.shape[0] != length:
                raise ValidationError("Trace: columns must have equal length")
            arrays[name] = arr
        self._columns = arrays
        self._length = length

    @property
    def column_names(self):
        return list(self._columns)

    def column(self, name: str) -> np.ndarray:
        return self._columns[name]

    def __len__(self):
        return self._length

    def row(self, i: int) -> dict:
        return {name: arr[i].item() for name, arr in self._columns.items()}

    def to_csv(self, target) -> None:
        """Write the trace to a path or file-like object."""
        if hasattr(target, "write"):
            self._write(target)
        else:
            with open(target, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        names = self.column_names
        writer.writerow(names)
        cols = [self._columns[n] for n in names]
        for i in range(self._length):
            writer.writerow([col[i].item() for col in cols])

    def csv_text(self) -> str:
        buf = io.StringIO()
        self._write(buf)
        return buf.getvalue()
