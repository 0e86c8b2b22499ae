"""Spectral data types and the small projector algebra every other module uses.

Everything here is a plain value object over float64 numpy arrays: a uniform
wavelength grid, a single spectral curve on that grid, an n-by-3 sensor matrix,
an orthonormalized basis of a sensor matrix, and a 3-by-3 correction matrix.
Arrays are copied on construction and marked read-only, so instances are safe
to share between threads.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .errors import GridMismatch, OutOfRange, RankDeficient, ShapeError

# Columns count as dependent when the smallest singular value falls below
# this fraction of the largest.
RANK_TOLERANCE = 1e-10


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class WavelengthGrid:
    """A uniform sampling of wavelength, ``count`` points from ``start`` in steps of ``step`` (nm)."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not (self.step > 0):
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.count < 3:
            raise ValueError(f"grid needs at least 3 samples, got {self.count}")

    @property
    def stop(self) -> float:
        """Last sampled wavelength in nm."""
        return self.start + self.step * (self.count - 1)

    def wavelengths(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count, dtype=float)


#: 400 nm to 700 nm every 10 nm, the usual 31-sample visible-range grid.
DEFAULT_GRID = WavelengthGrid(400.0, 10.0, 31)


@dataclass(frozen=True)
class SpectralCurve:
    """One spectral function sampled on a grid: a filter, an illuminant or a reflectance."""

    grid: WavelengthGrid
    values: np.ndarray

    def __post_init__(self):
        values = _readonly(self.values)
        if values.ndim != 1 or values.shape[0] != self.grid.count:
            raise ShapeError(
                f"curve has {values.shape} values for a grid of {self.grid.count} samples"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: WavelengthGrid, value: float = 1.0) -> "SpectralCurve":
        return cls(grid, np.full(grid.count, float(value)))


@dataclass(frozen=True)
class SensorSet:
    """Three-channel spectral sensitivities, one wavelength per row.

    Columns must be linearly independent; construction fails with
    ``RankDeficient`` otherwise.  Pass ``require_full_rank=False`` for
    intermediate products (e.g. a filtered camera) that may legitimately have
    lost rank; consumers that need rank 3 re-validate.
    """

    grid: WavelengthGrid
    channels: np.ndarray
    require_full_rank: InitVar[bool] = True

    def __post_init__(self, require_full_rank: bool):
        channels = _readonly(self.channels)
        if channels.ndim != 2 or channels.shape != (self.grid.count, 3):
            raise ShapeError(
                f"sensor matrix must be {self.grid.count}x3, got {channels.shape}"
            )
        if not np.all(np.isfinite(channels)):
            raise ValueError("sensor sensitivities must be finite")
        if require_full_rank:
            require_rank3(channels, "sensor matrix")
        object.__setattr__(self, "channels", channels)

    def channel_peaks(self) -> np.ndarray:
        """Per-channel maximum, recorded for reporting; sensitivities are never rescaled."""
        return self.channels.max(axis=0)


@dataclass(frozen=True)
class OrthoBasis:
    """An orthonormal basis V = X T of a sensor set's column space."""

    grid: WavelengthGrid
    basis: np.ndarray
    source_transform: np.ndarray

    def __post_init__(self):
        basis = _readonly(self.basis)
        transform = _readonly(self.source_transform)
        if basis.shape != (self.grid.count, 3) or transform.shape != (3, 3):
            raise ShapeError(
                f"basis must be {self.grid.count}x3 with a 3x3 transform, "
                f"got {basis.shape} and {transform.shape}"
            )
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(3))) > 1e-12:
            raise ValueError("basis columns are not orthonormal to 1e-12")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "source_transform", transform)


@dataclass(frozen=True)
class CorrectionMatrix:
    """A 3x3 linear map from one tristimulus space toward another."""

    m: np.ndarray

    def __post_init__(self):
        m = _readonly(self.m)
        if m.shape != (3, 3):
            raise ShapeError(f"correction matrix must be 3x3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("correction matrix entries must be finite")
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls) -> "CorrectionMatrix":
        return cls(np.eye(3))


def rank_ratio(matrix: np.ndarray) -> float:
    """Smallest singular value over largest; 0 for an all-zero matrix."""
    singular = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if singular[0] == 0.0:
        return 0.0
    return float(singular[-1] / singular[0])


def require_rank3(matrix: np.ndarray, name: str) -> None:
    """Raise ``RankDeficient`` naming ``name`` unless the n-by-3 matrix has full column rank."""
    if rank_ratio(matrix) <= RANK_TOLERANCE:
        raise RankDeficient(f"{name} is rank deficient (columns are numerically dependent)")


def require_same_grid(*grids: WavelengthGrid) -> None:
    first = grids[0]
    for other in grids[1:]:
        if other != first:
            raise GridMismatch(f"wavelength grids differ: {first} vs {other}")


def projector(s: np.ndarray) -> np.ndarray:
    """Orthogonal projector s (s^T s)^-1 s^T onto the column space of an n-by-3 matrix.

    The 3x3 Gram system is solved by LU factorization with partial pivoting
    rather than an explicit inverse.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[1] != 3 or s.shape[0] < 3:
        raise ShapeError(f"projector needs an n-by-3 matrix with n >= 3, got {s.shape}")
    require_rank3(s, "projector input")
    return s @ np.linalg.solve(s.T @ s, s.T)


def orthonormalize(x: SensorSet) -> OrthoBasis:
    """Orthonormal basis of a sensor set's column space via thin QR.

    Returns V and the 3x3 transform T with V = X T, V^T V = I.  Column signs
    follow the convention diag(R) > 0, so an already-orthonormal input maps to
    itself with T = I.
    """
    require_rank3(x.channels, "sensor matrix")
    q, r = np.linalg.qr(x.channels)
    signs = np.sign(np.diag(r))
    signs[signs == 0.0] = 1.0
    basis = q * signs
    transform = np.linalg.solve(r, np.diag(signs))
    return OrthoBasis(x.grid, basis, transform)


def apply_filter(f: SpectralCurve, q: SensorSet) -> SensorSet:
    """Sensitivities seen through a transmissive filter: row i scaled by f[i].

    The result may be rank deficient (a filter can zero out a channel), so it
    is returned unvalidated; projector-consuming callers re-check rank.
    """
    require_same_grid(f.grid, q.grid)
    return SensorSet(q.grid, f.values[:, None] * q.channels, require_full_rank=False)


def resample(c: SpectralCurve, target: WavelengthGrid) -> SpectralCurve:
    """Linearly interpolate a curve onto another grid; no extrapolation."""
    if c.grid == target:
        return SpectralCurve(target, c.values)
    values = interp_columns(c.grid.wavelengths(), c.values[:, None], target)[:, 0]
    return SpectralCurve(target, values)


def interp_columns(
    wavelengths: np.ndarray, columns: np.ndarray, target: WavelengthGrid
) -> np.ndarray:
    """Column-wise linear interpolation from arbitrary increasing wavelengths onto a grid.

    Raises ``OutOfRange`` if the target extends beyond the source endpoints
    (a 1e-9 nm slack absorbs float fuzz).  Shared wavelengths are preserved
    exactly.
    """
    slack = 1e-9
    if target.start < wavelengths[0] - slack or target.stop > wavelengths[-1] + slack:
        raise OutOfRange(
            f"target grid {target.start}..{target.stop} nm exceeds source range "
            f"{wavelengths[0]}..{wavelengths[-1]} nm"
        )
    out_wl = target.wavelengths()
    out = np.empty((target.count, columns.shape[1]))
    for j in range(columns.shape[1]):
        out[:, j] = np.interp(out_wl, wavelengths, columns[:, j])
    return out
