"""Optimizer result types shared by the ALS and gradient-ascent solvers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConsistencyError
from .spectra import CorrectionMatrix, SpectralCurve
from .vora import VoraScore

# A Vora-Value trace may dip by at most this much between iterations before
# we call it a bug rather than round-off.
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class TracePoint:
    """State after one optimizer iteration (iteration 0 is the initial filter)."""

    iteration: int
    vora_value: float
    residual: float
    filter_values: np.ndarray

    def __post_init__(self):
        values = np.array(self.filter_values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "filter_values", values)


@dataclass(frozen=True)
class ConvergenceTrace:
    """Per-iteration optimizer history; the Vora-Value sequence never decreases."""

    points: tuple[TracePoint, ...]

    def __post_init__(self):
        points = tuple(self.points)
        if not points:
            raise ValueError("a convergence trace needs at least the initial point")
        for prev, cur in zip(points, points[1:]):
            if cur.vora_value < prev.vora_value - MONOTONE_SLACK:
                raise ConsistencyError(
                    f"Vora-Value decreased from {prev.vora_value!r} to {cur.vora_value!r} "
                    f"at iteration {cur.iteration}"
                )
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[TracePoint]:
        return iter(self.points)

    def __getitem__(self, index) -> TracePoint:
        return self.points[index]

    def vora_values(self) -> np.ndarray:
        return np.array([p.vora_value for p in self.points])

    def residuals(self) -> np.ndarray:
        return np.array([p.residual for p in self.points])

    def final(self) -> TracePoint:
        return self.points[-1]


@dataclass(frozen=True)
class FilterSolution:
    """An optimized filter, its least-squares correction partner and history.

    The reported filter is rescaled so its maximum entry is 1 (the correction
    matrix absorbs the scale, and the Vora-Value is unchanged).  ``converged``
    is False when the iteration cap was reached first.
    """

    filter: SpectralCurve
    correction: CorrectionMatrix
    score: VoraScore
    trace: ConvergenceTrace
    iterations: int
    converged: bool

    def __post_init__(self):
        if len(self.trace) != self.iterations + 1:
            raise ConsistencyError(
                f"trace has {len(self.trace)} points for {self.iterations} iterations"
            )
