"""Dataset ingestion: IDX and CSV readers, column normalisation, one-hot labels.

Data matrices are column-per-sample, ``d x N``.
"""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "CsvParseError",
    "DataFormatError",
    "IdxCountMismatch",
    "IdxMagicError",
    "IdxTruncatedError",
    "LabeledDataset",
    "load_csv_matrix",
    "load_idx",
    "load_idx_images",
    "load_idx_labels",
    "normalize_columns",
    "one_hot",
    "scale_unit_interval",
]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class DataFormatError(ValueError):
    """Base class for malformed dataset files."""


class IdxMagicError(DataFormatError):
    pass


class IdxTruncatedError(DataFormatError):
    pass


class IdxCountMismatch(DataFormatError):
    pass


class CsvParseError(DataFormatError):
    def __init__(self, message: str, row: int, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class LabeledDataset:
    data: np.ndarray
    labels: np.ndarray | None
    class_count: int
    image_shape: tuple | None = None

    def __post_init__(self):
        if self.labels is not None:
            if len(self.labels) != self.data.shape[1]:
                raise ValueError(
                    f"{len(self.labels)} labels for {self.data.shape[1]} samples"
                )
            if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
                raise ValueError(f"labels must lie in [0, {self.class_count})")

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


def _read_bytes(path) -> bytes:
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def load_idx_images(path, return_shape: bool = False):
    """Read an IDX image file (gzip or raw) into a ``d x N`` float matrix.

    With ``return_shape`` the image ``(rows, cols)`` is returned as well.
    """
    raw = _read_bytes(path)
    if len(raw) < 16:
        raise IdxTruncatedError(f"{path}: header needs 16 bytes, file has {len(raw)}")
    magic, n, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise IdxMagicError(f"{path}: image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}")
    need = n * rows * cols
    if len(raw) - 16 < need:
        raise IdxTruncatedError(f"{path}: payload has {len(raw) - 16} bytes, header implies {need}")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=need, offset=16)
    Y = pixels.reshape(n, rows * cols).T.astype(np.float64)
    return (Y, (rows, cols)) if return_shape else Y


def load_idx_labels(path) -> np.ndarray:
    raw = _read_bytes(path)
    if len(raw) < 8:
        raise IdxTruncatedError(f"{path}: header needs 8 bytes, file has {len(raw)}")
    magic, n = struct.unpack(">II", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise IdxMagicError(f"{path}: label magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}")
    if len(raw) - 8 < n:
        raise IdxTruncatedError(f"{path}: payload has {len(raw) - 8} bytes, header implies {n}")
    return np.frombuffer(raw, dtype=np.uint8, count=n, offset=8).astype(np.int64)


def load_idx(path_images, path_labels=None) -> LabeledDataset:
    """Load an IDX image file and, optionally, its label file."""
    Y, shape = load_idx_images(path_images, return_shape=True)
    if path_labels is None:
        return LabeledDataset(Y, None, 0, shape)
    labels = load_idx_labels(path_labels)
    if len(labels) != Y.shape[1]:
        raise IdxCountMismatch(f"{Y.shape[1]} images but {len(labels)} labels")
    return LabeledDataset(Y, labels, int(labels.max()) + 1 if len(labels) else 0, shape)


def load_csv_matrix(path, has_label_column: bool = False) -> LabeledDataset:
    """Read a numeric CSV with one sample per row (LF or CRLF line endings).

    With ``has_label_column`` the last column holds integer class labels.
    Row and column numbers in errors are 1-based.
    """
    rows = []
    width = None
    with open(path, newline="") as fh:
        for r, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise CsvParseError(f"row {r}: expected {width} cells, found {len(record)}", r)
            values = []
            for c, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvParseError(f"row {r}, column {c}: not a number: {cell!r}", r, c) from None
            rows.append(values)
    if not rows:
        raise CsvParseError(f"{path}: no data rows", 0)
    table = np.asarray(rows, dtype=np.float64)
    if not has_label_column:
        return LabeledDataset(table.T.copy(), None, 0)
    if table.shape[1] < 2:
        raise CsvParseError(f"{path}: label column requested but rows have a single cell", 1)
    raw_labels = table[:, -1]
    bad = np.flatnonzero((raw_labels != np.round(raw_labels)) | (raw_labels < 0))
    if bad.size:
        r = int(bad[0]) + 1
        raise CsvParseError(f"row {r}, column {table.shape[1]}: label must be a non-negative integer", r, table.shape[1])
    labels = raw_labels.astype(np.int64)
    return LabeledDataset(table[:, :-1].T.copy(), labels, int(labels.max()) + 1)


def normalize_columns(Y, keep_zero: bool = False) -> np.ndarray:
    """Scale every column to unit l2 norm.

    An all-zero column is an error unless ``keep_zero`` is set, in which case
    it is passed through unchanged.
    """
    Y = np.asarray(Y, dtype=np.float64)
    norms = np.sqrt(np.sum(Y * Y, axis=0))
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        if not keep_zero:
            raise ValueError(f"column {int(zero[0])} is all zeros and cannot be normalised")
        norms = np.where(norms == 0, 1.0, norms)
    return Y / norms


def scale_unit_interval(Y, dynamic_range: float = 255.0) -> np.ndarray:
    """Map pixel values from ``[0, dynamic_range]`` to ``[0, 1]``."""
    return np.asarray(Y, dtype=np.float64) / dynamic_range


def one_hot(labels, c: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be a 1-D sequence")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        bad = labels[(labels < 0) | (labels >= c)][0]
        raise ValueError(f"label {bad} out of range for {c} classes")
    H = np.zeros((c, labels.size))
    H[labels, np.arange(labels.size)] = 1.0
    return H
