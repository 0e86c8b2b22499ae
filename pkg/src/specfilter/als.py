"""Alternating least-squares filter optimizer.

Each sweep solves two closed-form least-squares problems in turn: the 3x3
transform that best maps the filtered camera onto the orthonormalized target
basis, then the per-wavelength filter entries that best map the transformed
camera onto the same basis.  Both half-steps are exact minimizers of the same
squared residual, so the residual never increases and the Vora-Value never
decreases.  Iteration stops once a sweep improves the Vora-Value by less than
``epsilon``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConsistencyError, RankDeficient
from .solution import ConvergenceTrace, FilterSolution, TracePoint
from .spectra import (
    CorrectionMatrix,
    OrthoBasis,
    SensorSet,
    SpectralCurve,
    WavelengthGrid,
    orthonormalize,
    rank_ratio,
    require_rank3,
    require_same_grid,
    RANK_TOLERANCE,
)
from .vora import vora_value

# Rows of QM with squared norm below this contribute nothing; their filter
# entry is pinned to 0 for reproducibility.
DEGENERATE_ROW_NORM = 1e-20

# After the Vora-Value stopping rule fires, extra unrecorded sweeps contract
# the filter the rest of the way to the ALS fixed point: the Vora-Value locates
# the optimum to round-off long before the iterate stops moving, so a
# fixed-point-quality filter needs this polish.  Bounded so pathological
# instances cannot spin.
POLISH_STEP_TOL = 1e-9
POLISH_MAX_SWEEPS = 5000


@dataclass(frozen=True)
class AlsConfig:
    """Stopping rule and starting point for the ALS solver.

    ``initial_filter`` is either the name ``"ones"`` (neutral filter) or an
    explicit curve.  ``epsilon`` is the minimum Vora-Value increase per sweep;
    the generous defaults make hitting ``max_iterations`` a signal, not a
    nuisance.
    """

    epsilon: float = 1e-9
    max_iterations: int = 10_000
    initial_filter: SpectralCurve | str = "ones"

    def __post_init__(self):
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


def solve_m(f: SpectralCurve, q: SensorSet, v: OrthoBasis) -> CorrectionMatrix:
    """Least-squares 3x3 transform M minimizing ||diag(f) Q M - V||^2_F."""
    require_same_grid(f.grid, q.grid, v.grid)
    fq = f.values[:, None] * q.channels
    require_rank3(fq, "filtered camera")
    return CorrectionMatrix(np.linalg.solve(fq.T @ fq, fq.T @ v.basis))


def solve_f(q: SensorSet, m: CorrectionMatrix, v: OrthoBasis) -> SpectralCurve:
    """Per-row filter entries minimizing ||diag(f) (Q M) - V||^2_F.

    Each row is an independent scalar least-squares problem with solution
    (QM)_i . V_i / (QM)_i . (QM)_i; rows with vanishing source norm get 0.
    """
    require_same_grid(q.grid, v.grid)
    qm = q.channels @ m.m
    numerator = np.sum(qm * v.basis, axis=1)
    denominator = np.sum(qm * qm, axis=1)
    degenerate = denominator < DEGENERATE_ROW_NORM
    values = np.where(degenerate, 0.0, numerator / np.where(degenerate, 1.0, denominator))
    return SpectralCurve(q.grid, values)


def _normalized(f: np.ndarray) -> tuple[np.ndarray, float]:
    """Scale a filter so its maximum entry is 1; returns (scaled, scale factor)."""
    peak = float(np.max(f))
    if peak <= 0.0:
        peak = float(np.max(np.abs(f)))
    if peak == 0.0:
        return f, 1.0
    return f / peak, peak


def optimize_als(q: SensorSet, x: SensorSet, config: AlsConfig | None = None) -> FilterSolution:
    """Run the alternating least-squares sweep until the Vora-Value stalls.

    Raises ``RankDeficient`` (tagged with the iteration index) if the filter
    ever zeroes out a camera channel; returns with ``converged=False`` when
    ``max_iterations`` is reached first.
    """
    config = config or AlsConfig()
    require_same_grid(q.grid, x.grid)
    qc = q.channels
    vb = orthonormalize(x).basis

    f = config.resolve_initial(q.grid).values
    fq = f[:, None] * qc
    if rank_ratio(fq) <= RANK_TOLERANCE:
        raise RankDeficient("initial filter leaves the camera rank deficient (iteration 0)")

    # basis_score shares its solve with the transform update: both need
    # G^-1 W, so each sweep costs one 3x3 solve plus one rank check.
    w = fq.T @ vb
    m = np.linalg.solve(fq.T @ fq, w)
    score_prev = float(np.sum(m * w) / 3.0)
    points = [TracePoint(0, score_prev, _residual_arrays(fq, m, vb), f)]

    converged = False
    iterations = 0
    for i in range(1, config.max_iterations + 1):
        # m currently holds this sweep's transform (solved for the previous filter).
        qm = qc @ m
        numerator = np.sum(qm * vb, axis=1)
        denominator = np.sum(qm * qm, axis=1)
        degenerate = denominator < DEGENERATE_ROW_NORM
        f = np.where(degenerate, 0.0, numerator / np.where(degenerate, 1.0, denominator))

        fq = f[:, None] * qc
        if rank_ratio(fq) <= RANK_TOLERANCE:
            raise RankDeficient(f"filter zeroed a camera channel at iteration {i}")
        w = fq.T @ vb
        m_next = np.linalg.solve(fq.T @ fq, w)
        score = float(np.sum(m_next * w) / 3.0)
        points.append(TracePoint(i, score, _residual_arrays(fq, m, vb), f))
        iterations = i

        delta = score - score_prev
        if delta < -1e-12:
            raise ConsistencyError(
                f"ALS Vora-Value dropped by {-delta:.3e} at iteration {i}"
            )
        if delta < config.epsilon:
            converged = True
            break
        score_prev = score
        m = m_next

    if converged:
        f = _polish_to_fixed_point(f, qc, vb)

    f_out, _ = _normalized(f)
    fq_out = f_out[:, None] * qc
    filter_curve = SpectralCurve(q.grid, f_out)
    final_score = vora_value(SensorSet(q.grid, fq_out, require_full_rank=False), x)
    correction = CorrectionMatrix(np.linalg.solve(fq_out.T @ fq_out, fq_out.T @ vb))
    return FilterSolution(
        filter=filter_curve,
        correction=correction,
        score=final_score,
        trace=ConvergenceTrace(tuple(points)),
        iterations=iterations,
        converged=converged,
    )


def _polish_to_fixed_point(f: np.ndarray, qc: np.ndarray, vb: np.ndarray) -> np.ndarray:
    """Contract a converged iterate to the ALS fixed point with unrecorded sweeps."""
    scale = float(np.max(np.abs(f))) or 1.0
    for _ in range(POLISH_MAX_SWEEPS):
        fq = f[:, None] * qc
        if rank_ratio(fq) <= RANK_TOLERANCE:
            break
        m = np.linalg.solve(fq.T @ fq, fq.T @ vb)
        qm = qc @ m
        numerator = np.sum(qm * vb, axis=1)
        denominator = np.sum(qm * qm, axis=1)
        degenerate = denominator < DEGENERATE_ROW_NORM
        f_next = np.where(degenerate, 0.0, numerator / np.where(degenerate, 1.0, denominator))
        step = float(np.max(np.abs(f_next - f)))
        f = f_next
        if step < POLISH_STEP_TOL * scale:
            break
    return f


def random_filter(grid: WavelengthGrid, rng: np.random.Generator) -> SpectralCurve:
    """A random starting filter with entries uniform in (0, 1]."""
    return SpectralCurve(grid, 1.0 - rng.random(grid.count))


def _batched_final_scores(
    initial: np.ndarray, qc: np.ndarray, vb: np.ndarray, epsilon: float, max_iterations: int
) -> np.ndarray:
    """Final Vora-Value of an ALS run from each row of ``initial``, in lockstep.

    All starts advance together with stacked 3x3 solves; a start freezes once
    its per-sweep gain drops below ``epsilon`` and is scored -inf if it hits
    rank deficiency or a beyond-round-off decrease (the sequential runner
    would raise for those; here the start is simply discarded).
    """
    f = initial.copy()
    fq = f[:, :, None] * qc[None, :, :]
    singular = np.linalg.svd(fq, compute_uv=False)
    dead = singular[:, -1] <= RANK_TOLERANCE * singular[:, 0]
    active = ~dead

    gram = fq.transpose(0, 2, 1) @ fq
    gram[dead] = np.eye(3)
    w = fq.transpose(0, 2, 1) @ vb
    m = np.linalg.solve(gram, w)
    scores = np.einsum("kij,kij->k", m, w) / 3.0
    scores[dead] = -np.inf

    for _ in range(max_iterations):
        if not np.any(active):
            break
        qm = qc[None, :, :] @ m
        numerator = np.einsum("knj,nj->kn", qm, vb)
        denominator = np.einsum("knj,knj->kn", qm, qm)
        degenerate = denominator < DEGENERATE_ROW_NORM
        f_new = np.where(degenerate, 0.0, numerator / np.where(degenerate, 1.0, denominator))
        f = np.where(active[:, None], f_new, f)

        fq = f[:, :, None] * qc[None, :, :]
        singular = np.linalg.svd(fq, compute_uv=False)
        lost_rank = active & (singular[:, -1] <= RANK_TOLERANCE * singular[:, 0])
        dead |= lost_rank
        active &= ~lost_rank

        gram = fq.transpose(0, 2, 1) @ fq
        gram[~active] = np.eye(3)
        w = fq.transpose(0, 2, 1) @ vb
        m_new = np.linalg.solve(gram, w)
        new_scores = np.einsum("kij,kij->k", m_new, w) / 3.0

        delta = new_scores - scores
        inconsistent = active & (delta < -1e-12)
        dead |= inconsistent
        active &= ~inconsistent

        scores = np.where(active, new_scores, scores)
        scores[dead] = -np.inf
        active &= delta >= epsilon
        m = np.where(active[:, None, None], m_new, m)

    return scores


def optimize_als_multistart(
    q: SensorSet,
    x: SensorSet,
    config: AlsConfig | None = None,
    starts: int = 32,
    seed: int = 0,
) -> FilterSolution:
    """Best ALS solution over the configured start plus ``starts - 1`` random ones.

    ALS converges to a fixed point but not necessarily the global optimum, so
    restarting from seeded random filters (entries uniform in (0, 1]) guards
    against bad basins.  All starts are screened in one vectorized sweep and
    the winner is re-run sequentially, so the returned solution is exactly
    what ``optimize_als`` produces from the winning start.
    """
    config = config or AlsConfig()
    require_same_grid(q.grid, x.grid)
    if starts < 1:
        raise ValueError(f"need at least one start, got {starts}")
    rng = np.random.default_rng(seed)
    initial = np.empty((starts, q.grid.count))
    initial[0] = config.resolve_initial(q.grid).values
    for row in range(1, starts):
        initial[row] = 1.0 - rng.random(q.grid.count)

    vb = orthonormalize(x).basis
    scores = _batched_final_scores(
        initial, q.channels, vb, config.epsilon, config.max_iterations
    )
    if not np.any(np.isfinite(scores)):
        raise RankDeficient("every start hit rank deficiency before converging")
    winner = int(np.argmax(scores))
    if winner == 0:
        return optimize_als(q, x, config)
    winning_config = replace(config, initial_filter=SpectralCurve(q.grid, initial[winner]))
    return optimize_als(q, x, winning_config)


def _residual_arrays(fq: np.ndarray, m: np.ndarray, basis: np.ndarray) -> float:
    deviation = fq @ m - basis
    return float(np.sum(deviation * deviation))
