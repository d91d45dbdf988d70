"""Container for a single curve, analytic or Monte Carlo."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AXES = ("gamma", "ebn0_db", "beta", "N", "lambda", "x")


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Abscissae with per-point mean and, for Monte Carlo curves, dispersion.

    ``std`` is one standard deviation of the per-trial statistic (not the
    standard error); ``stderr`` divides it by the square root of ``trials``.
    """

    axis: str
    x: np.ndarray
    mean: np.ndarray
    std: np.ndarray | None = None
    trials: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        x = np.asarray(self.x, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        if x.shape != mean.shape or x.ndim != 1:
            raise ValueError("x and mean must be 1-D arrays of equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "mean", mean)
        if self.std is not None:
            std = np.asarray(self.std, dtype=float)
            if std.shape != x.shape:
                raise ValueError("std must match x")
            if np.any(std < 0):
                raise ValueError("std must be nonnegative")
            object.__setattr__(self, "std", std)
        if self.trials is not None:
            trials = np.asarray(self.trials, dtype=np.int64)
            if trials.shape != x.shape:
                raise ValueError("trials must match x")
            object.__setattr__(self, "trials", trials)

    def __len__(self):
        return self.x.size

    @property
    def empirical(self) -> bool:
        return self.std is not None

    @property
    def stderr(self) -> np.ndarray | None:
        if self.std is None or self.trials is None:
            return None
        return self.std / np.sqrt(self.trials)
