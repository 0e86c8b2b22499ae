"""Gradient-ascent Vora-Value optimizer, the comparison baseline for ALS.

The objective is nu(f) = (1/3) trace(P{diag(f) Q} P{X}) as a function of the
per-wavelength filter entries.  The gradient follows from the differential of
an orthogonal projector: with A = diag(f) Q, G = A^T A, W = A^T V and
S = G^-1 W (V an orthonormal basis of the observer),

    dnu/df_i = (2/3) * sum_j Q_ij C_ij,   C = (V - A S) S^T,

which is the projector-differential contraction rearranged so no n-by-n
matrix is ever formed.  The derivation is self-certified: the test suite
requires agreement with central finite differences before the gradient is
trusted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .als import random_filter, solve_m
from .errors import RankDeficient
from .solution import ConvergenceTrace, FilterSolution, TracePoint
from .spectra import (
    RANK_TOLERANCE,
    SensorSet,
    SpectralCurve,
    WavelengthGrid,
    orthonormalize,
    rank_ratio,
    require_same_grid,
)
from .vora import basis_score, vora_value

# Line search gives up once the step underflows this; the iterate is then
# numerically stationary.
MIN_STEP = 1e-14


@dataclass(frozen=True)
class GaConfig:
    """Step rule and stopping rule for gradient ascent.

    ``step_rule="backtracking"`` (default) starts each iteration at
    ``initial_step`` and shrinks by ``shrink`` until the Armijo sufficient-
    increase test with constant ``sufficient_increase`` passes, which makes
    the Vora-Value trace monotone.  ``step_rule="fixed"`` takes ``fixed_step``
    unconditionally and reproduces the slow-convergence behaviour of plain
    ascent.  Stopping mirrors the ALS rule: quit when an iteration improves
    the Vora-Value by less than ``epsilon``.
    """

    step_rule: str = "backtracking"
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_increase: float = 1e-4
    fixed_step: float = 0.1
    epsilon: float = 1e-9
    max_iterations: int = 10_000
    initial_filter: SpectralCurve | str = "ones"

    def __post_init__(self):
        if self.step_rule not in ("backtracking", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if not (self.initial_step > 0 and self.fixed_step > 0 and self.sufficient_increase > 0):
            raise ValueError("step parameters must be positive")
        if not (0.0 < self.shrink < 1.0):
            raise ValueError(f"shrink factor must be in (0, 1), got {self.shrink}")
        if not (self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")

    def resolve_initial(self, grid: WavelengthGrid) -> SpectralCurve:
        if isinstance(self.initial_filter, SpectralCurve):
            require_same_grid(self.initial_filter.grid, grid)
            return self.initial_filter
        if self.initial_filter == "ones":
            return SpectralCurve.constant(grid, 1.0)
        raise ValueError(f"unknown initial filter preset {self.initial_filter!r}")


def _gradient_arrays(f: np.ndarray, qc: np.ndarray, vb: np.ndarray) -> tuple[np.ndarray, float]:
    """(gradient, score) sharing one 3x3 solve; assumes rank already checked."""
    a = f[:, None] * qc
    w = a.T @ vb
    s = np.linalg.solve(a.T @ a, w)
    c = (vb - a @ s) @ s.T
    return (2.0 / 3.0) * np.sum(qc * c, axis=1), float(np.sum(s * w) / 3.0)


def vora_gradient(f: SpectralCurve, q: SensorSet, x: SensorSet) -> np.ndarray:
    """Partial derivatives of the Vora-Value with respect to each filter entry."""
    require_same_grid(f.grid, q.grid, x.grid)
    if rank_ratio(f.values[:, None] * q.channels) <= RANK_TOLERANCE:
        raise RankDeficient("filtered camera is rank deficient")
    gradient, _ = _gradient_arrays(f.values, q.channels, orthonormalize(x).basis)
    return gradient


def _score(f: np.ndarray, qc: np.ndarray, vb: np.ndarray) -> float | None:
    """Vora-Value of the filtered camera, or None when the filter kills rank."""
    fq = f[:, None] * qc
    if rank_ratio(fq) <= RANK_TOLERANCE:
        return None
    return basis_score(fq, vb)


def optimize_ga(q: SensorSet, x: SensorSet, config: GaConfig | None = None) -> FilterSolution:
    """Maximize the Vora-Value by gradient ascent over the filter entries."""
    config = config or GaConfig()
    require_same_grid(q.grid, x.grid)
    qc = q.channels
    v = orthonormalize(x)
    vb = v.basis

    f = config.resolve_initial(q.grid).values
    score = _score(f, qc, vb)
    if score is None:
        raise RankDeficient("initial filter leaves the camera rank deficient (iteration 0)")
    points = [TracePoint(0, score, 3.0 - 3.0 * score, f)]

    converged = False
    iterations = 0
    for i in range(1, config.max_iterations + 1):
        grad, _ = _gradient_arrays(f, qc, vb)
        grad_norm_sq = float(grad @ grad)

        if config.step_rule == "fixed":
            candidate = f + config.fixed_step * grad
            new_score = _score(candidate, qc, vb)
            if new_score is None:
                raise RankDeficient(f"filter lost a camera channel at iteration {i}")
            if new_score < score:
                # Fixed step overshot: keep the better iterate and stop.
                converged = True
                break
        else:
            step = config.initial_step
            candidate, new_score = None, None
            while step >= MIN_STEP:
                trial = f + step * grad
                trial_score = _score(trial, qc, vb)
                if (
                    trial_score is not None
                    and trial_score >= score + config.sufficient_increase * step * grad_norm_sq
                ):
                    candidate, new_score = trial, trial_score
                    break
                step *= config.shrink
            if candidate is None:
                # No step yields sufficient increase: numerically stationary.
                converged = True
                break

        f = candidate
        iterations = i
        points.append(TracePoint(i, new_score, 3.0 - 3.0 * new_score, f))
        delta = new_score - score
        score = new_score
        if delta < config.epsilon:
            converged = True
            break

    peak = float(np.max(f))
    if peak <= 0.0:
        peak = float(np.max(np.abs(f))) or 1.0
    f_out = f / peak
    filter_curve = SpectralCurve(q.grid, f_out)
    correction = solve_m(filter_curve, q, v)
    final_score = vora_value(SensorSet(q.grid, f_out[:, None] * qc, require_full_rank=False), x)
    return FilterSolution(
        filter=filter_curve,
        correction=correction,
        score=final_score,
        trace=ConvergenceTrace(tuple(points)),
        iterations=iterations,
        converged=converged,
    )


def optimize_ga_multistart(
    q: SensorSet,
    x: SensorSet,
    config: GaConfig | None = None,
    starts: int = 32,
    seed: int = 0,
) -> FilterSolution:
    """Best gradient-ascent solution over the configured start plus random restarts."""
    config = config or GaConfig()
    rng = np.random.default_rng(seed)
    best = optimize_ga(q, x, config)
    for _ in range(starts - 1):
        candidate_config = replace(config, initial_filter=random_filter(q.grid, rng))
        try:
            candidate = optimize_ga(q, x, candidate_config)
        except RankDeficient:
            continue
        if candidate.score > best.score:
            best = candidate
    return best
