"""Reading and writing the delimited feature-vector file format.

A feature file is UTF-8 delimited text with the header

    id,label,f0,f1,...,f{d-1}

one row per vector.  The label column holds 0, 1, or nothing for unlabeled
rows.  The delimiter is configurable and defaults to a comma.  Floats are
written with repr so a round trip reproduces them bit for bit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Array, Collection, ControlSet, LabeledSet, as_matrix
from .errors import AuditError, FeatureFormatError, InvalidParameterError


@dataclass
class FeatureFile:
    """Parsed contents of one feature file.

    ``labels`` uses -1 for unlabeled rows.
    """

    ids: list[str]
    vectors: Array
    labels: Array

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def fully_labeled(self) -> bool:
        return len(self) > 0 and bool((self.labels >= 0).all())

    def to_collection(self) -> Collection:
        hidden = self.labels.copy() if self.fully_labeled else None
        return Collection(self.vectors.copy(), hidden)

    def to_labeled_set(self) -> LabeledSet:
        if not self.fully_labeled:
            raise InvalidParameterError("every row must be labeled")
        return LabeledSet(self.vectors.copy(), self.labels.copy())

    def to_control_set(self) -> ControlSet:
        return self.to_labeled_set().to_control_set()


def load_feature_file(path: str | Path, delimiter: str = ",") -> FeatureFile:
    """Parse and validate a feature file.

    Every row must have the header's column count, features must be finite
    numbers, and labels must be 0, 1, or empty.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as err:
        raise FeatureFormatError(f"{path}: {err.strerror or err}") from None
    with handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise FeatureFormatError(f"{path}: empty file") from None
        _check_header(header, path)
        ids: list[str] = []
        labels: list[int] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FeatureFormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            ids.append(row[0])
            labels.append(_parse_label(row[1], path, lineno))
            rows.append(_parse_features(row[2:], path, lineno))
    if not rows:
        raise FeatureFormatError(f"{path}: no data rows")
    vectors = np.asarray(rows, dtype=np.float64)
    try:
        as_matrix(vectors, name=str(path))
    except AuditError as err:
        raise FeatureFormatError(str(err)) from None
    return FeatureFile(
        ids=ids, vectors=vectors, labels=np.asarray(labels, dtype=np.int64)
    )


def save_feature_file(
    path: str | Path,
    vectors: Array,
    labels: object = None,
    ids: list[str] | None = None,
    delimiter: str = ",",
) -> None:
    """Write vectors (and optional labels) in the feature file format."""
    arr = as_matrix(vectors, name="vectors")
    n, dim = arr.shape
    if ids is None:
        ids = [str(i) for i in range(n)]
    if len(ids) != n:
        raise InvalidParameterError("ids length must match the number of vectors")
    label_text = [""] * n
    if labels is not None:
        lab = np.asarray(labels).reshape(-1)
        if lab.shape[0] != n:
            raise InvalidParameterError("labels length must match the number of vectors")
        label_text = [("" if v < 0 else str(int(v))) for v in lab]
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(["id", "label"] + [f"f{j}" for j in range(dim)])
        for i in range(n):
            writer.writerow([ids[i], label_text[i]] + [repr(float(v)) for v in arr[i]])


def save_labeled_set(
    path: str | Path, labeled: LabeledSet, delimiter: str = ","
) -> None:
    save_feature_file(path, labeled.vectors, labeled.labels, delimiter=delimiter)


def save_collection(
    path: str | Path, collection: Collection, delimiter: str = ","
) -> None:
    save_feature_file(
        path, collection.vectors, collection.hidden_labels, delimiter=delimiter
    )


def _check_header(header: list[str], path: Path) -> None:
    if len(header) < 3 or header[0] != "id" or header[1] != "label":
        raise FeatureFormatError(
            f"{path}: header must start with id,label and at least one feature column"
        )
    expected = [f"f{j}" for j in range(len(header) - 2)]
    if header[2:] != expected:
        raise FeatureFormatError(
            f"{path}: feature columns must be named f0..f{len(header) - 3} in order"
        )


def _parse_label(text: str, path: Path, lineno: int) -> int:
    text = text.strip()
    if text == "":
        return -1
    if text in ("0", "1"):
        return int(text)
    raise FeatureFormatError(f"{path}:{lineno}: label must be 0, 1, or empty, got {text!r}")


def _parse_features(fields: list[str], path: Path, lineno: int) -> list[float]:
    values: list[float] = []
    for field in fields:
        try:
            value = float(field)
        except ValueError:
            raise FeatureFormatError(
                f"{path}:{lineno}: feature {field!r} is not a number"
            ) from None
        if not math.isfinite(value):
            raise FeatureFormatError(f"{path}:{lineno}: feature {field!r} is not finite")
        values.append(value)
    return values
