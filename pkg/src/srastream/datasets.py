"""Loaders for user-supplied benchmark datasets.

Nothing is downloaded here. The loaders ingest local copies of the public
drilling well-log series (one value per line) and labeled anomaly CSVs in
the SMTP/THYROID style (feature columns plus a final 0/1 label column).
Expert change-point annotation sets for the well-log series ship as
built-in constants, together with the conventional tuning-range defaults.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

#: Expert change-point annotation sets for the well-log series, keyed 1..5.
#: Times are 1-based sample indices.
WELL_LOG_ANNOTATIONS: dict[int, tuple[int, ...]] = {
    1: (1069, 1525, 1681, 1861, 2053, 2407, 2473, 2527, 2587, 2767, 2779),
    2: (1069, 1525, 1681, 1867, 2053, 2407, 2467, 2527, 2587),
    3: (1069, 1525, 1687, 1867, 2053, 2407, 2473, 2527, 2587),
    4: (1057, 2797),
    5: (19, 1069, 1525, 1681, 1861, 2059, 2407, 2467, 2527, 2587, 2767,
        2779, 3121, 3151, 3715, 3853, 3961),
}

#: Default number of leading samples used for hyperparameter tuning.
TUNING_SPLITS = {"well-log": 1550, "smtp": 40000, "thyroid": 2000}

#: Default alarm-evaluation range on the tuning portion of the well-log data.
WELL_LOG_TUNE_RANGE = (20, 1150)


@dataclass
class LabeledDataset:
    """Feature matrix plus 0/1 anomaly labels."""

    y: np.ndarray  # (T, d)
    labels: np.ndarray  # (T,) bool

    @property
    def T(self) -> int:
        return self.y.shape[0]


def load_well_log(path) -> np.ndarray:
    """Read a one-value-per-line series into a (T, 1) float array.

    Blank lines are skipped; anything non-numeric raises a ValueError that
    names the offending line.
    """
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValueError(
                    f"non-numeric value at line {lineno}: {line!r}"
                ) from exc
    if not values:
        raise ValueError("series file is empty")
    return np.asarray(values, dtype=float).reshape(-1, 1)


def load_labeled_csv(path, label_column: int = -1, has_header: bool = True) -> LabeledDataset:
    """Read an anomaly benchmark CSV: feature columns plus a 0/1 label column.

    ``label_column`` indexes the label within each row (default: last).
    """
    ys, labels = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if has_header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if has_header else 1):
            if not row:
                continue
            try:
                lab = int(float(row[label_column]))
                feats = [
                    float(v)
                    for i, v in enumerate(row)
                    if i != label_column % len(row)
                ]
            except (ValueError, IndexError) as exc:
                raise ValueError(f"malformed row at line {lineno}") from exc
            if lab not in (0, 1):
                raise ValueError(f"label at line {lineno} is not 0/1: {lab}")
            ys.append(feats)
            labels.append(bool(lab))
    if not ys:
        raise ValueError("dataset file has no data rows")
    y = np.asarray(ys, dtype=float)
    if y.ndim != 2 or len({len(r) for r in ys}) != 1:
        raise ValueError("rows have inconsistent column counts")
    return LabeledDataset(y, np.asarray(labels, dtype=bool))


def tuning_split(name: str, T: int) -> int:
    """Default tuning split for a named dataset, clipped to the length."""
    key = name.lower()
    if key not in TUNING_SPLITS:
        raise KeyError(f"no default split for dataset {name!r}")
    return min(TUNING_SPLITS[key], T)
