"""Weighted regression/classification datasets."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class WeightedDataset:
    """Inputs ``x`` (n, d), targets ``y`` (n,) and per-example loss weights ``w`` (n,)."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        if np.ndim(self.x) == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        w = np.asarray(self.w, dtype=np.float64).reshape(-1)
        if not (len(x) == len(y) == len(w)):
            raise DomainError(f"length mismatch: x={len(x)}, y={len(y)}, w={len(w)}")
        # zero weights are tolerated so a record can be masked out of a batch
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("loss weights must be finite and nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)

    @classmethod
    def unweighted(cls, x, y):
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        return cls(x, y, np.ones_like(y))

    def __len__(self):
        return len(self.y)

    @property
    def input_dim(self):
        return self.x.shape[1]

    def subset(self, idx):
        idx = np.asarray(idx)
        return WeightedDataset(self.x[idx], self.y[idx], self.w[idx])

    def concat(self, other):
        return WeightedDataset(
            np.vstack([self.x, other.x]),
            np.concatenate([self.y, other.y]),
            np.concatenate([self.w, other.w]),
        )

    def with_targets(self, y):
        return WeightedDataset(self.x, y, self.w)

    def to_csv(self, path):
        header = [f"x{j}" for j in range(self.input_dim)] + ["y", "weight"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for xi, yi, wi in zip(self.x, self.y, self.w):
                writer.writerow([repr(float(v)) for v in xi] + [repr(float(yi)), repr(float(wi))])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[-2:] != ["y", "weight"] or not all(h.startswith("x") for h in header[:-2]):
                raise DomainError(f"unexpected dataset header {header}")
            rows = [[float(v) for v in row] for row in reader if row]
        arr = np.array(rows, dtype=np.float64).reshape(-1, len(header))
        return cls(arr[:, :-2], arr[:, -2], arr[:, -1])
