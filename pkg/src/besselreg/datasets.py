"""Bundled example datasets with their conventional modeling roles.

All three are classic bounded-response regression examples:

- stress/anxiety: anxiety scores of 166 nondepressed women regressed on
  stress (both linearly rescaled to the open unit interval).
- weather task: probability-agreement scores of 345 participants with
  two binary experimental factors (priming, eliciting).
- body fat: Siri body-fat proportion of 252 men with 13 body
  measurements; all measurements divided by 100. One subject's zero
  response is recorded as 1e-5, and the standard analysis drops the
  implausible subject in row 42 (1-based data row).
"""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from .regression import Dataset

_BODY_FAT_DROP_ROW = 41          # 0-based index of the dropped subject
_BODY_FAT_VIF_DROP_ROWS = (38, 41)  # also drop row 39 for VIF screening

BODY_FAT_COVARIATES = ("age", "chest", "thigh", "wrist")


def _read_csv(name):
    path = resources.files("besselreg.data").joinpath(name)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(c) for c in row] for row in reader])
    return header, rows


def load_stress_anxiety() -> Dataset:
    """anxiety ~ stress (mean), constant precision."""
    header, rows = _read_csv("stress_anxiety.csv")
    stress = rows[:, header.index("stress")]
    anxiety = rows[:, header.index("anxiety")]
    n = anxiety.size
    X = np.column_stack([np.ones(n), stress])
    V = np.ones((n, 1))
    return Dataset(anxiety, X, V, ["intercept", "stress"], ["intercept"],
                   response_name="anxiety")


def load_weather_task() -> Dataset:
    """agreement ~ priming + eliciting (mean), constant precision."""
    header, rows = _read_csv("weather_task.csv")
    z = rows[:, header.index("agreement")]
    n = z.size
    X = np.column_stack([
        np.ones(n),
        rows[:, header.index("priming")],
        rows[:, header.index("eliciting")],
    ])
    V = np.ones((n, 1))
    return Dataset(z, X, V, ["intercept", "priming", "eliciting"],
                   ["intercept"], response_name="agreement")


def load_body_fat(covariates=BODY_FAT_COVARIATES) -> Dataset:
    """bodyfat ~ age + chest + thigh + wrist (mean), constant precision.

    The subject in data row 42 is excluded (n = 251)."""
    header, rows = _read_csv("body_fat.csv")
    rows = np.delete(rows, _BODY_FAT_DROP_ROW, axis=0)
    z = rows[:, header.index("bodyfat")]
    n = z.size
    X = np.column_stack(
        [np.ones(n)] + [rows[:, header.index(c)] for c in covariates]
    )
    V = np.ones((n, 1))
    return Dataset(z, X, V, ["intercept", *covariates], ["intercept"],
                   response_name="bodyfat")


def body_fat_candidates():
    """The 13 candidate measurement columns used for VIF screening,
    with rows 39 and 42 (1-based) excluded. Returns (matrix, names)."""
    header, rows = _read_csv("body_fat.csv")
    rows = np.delete(rows, list(_BODY_FAT_VIF_DROP_ROWS), axis=0)
    names = [c for c in header if c != "bodyfat"]
    M = np.column_stack([rows[:, header.index(c)] for c in names])
    return M, names
