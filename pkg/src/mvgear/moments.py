"""
Moment estimation and covariance diagnostics.

Expected returns are sample column means of a T x n panel of per-period
simple returns; the covariance is the unbiased (T-1 denominator) sample
covariance. Every covariance handed to the solvers is wrapped in a
:class:`CovMatrix`, which caches the spectral decomposition

    Sigma = V diag(rho_1, ..., rho_n) V',   rho_1 >= ... >= rho_n > 0,

so that all downstream linear solves reuse the same eigendata that the
angle bounds need. Near-singular sample covariances are repaired by
clipping eigenvalues at a floor relative to the largest one.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricCovariance,
    ConvergenceFailure,
    DegenerateAlpha,
    DimensionError,
    NonFiniteData,
    SingularCovariance,
)

# Relative symmetry tolerance for accepting covariance entries.
SYMMETRY_RTOL = 1e-12
# Relative Frobenius tolerance for the spectral reconstruction check.
RECONSTRUCTION_RTOL = 1e-10
# Eigenvalue floor, relative to rho_1, below which repair/rejection kicks in.
EIGEN_FLOOR_RATIO = 1e-10
# Column means closer than this are considered degenerate (all equal).
DEGENERATE_ALPHA_TOL = 1e-14


class SpdRepairWarning(UserWarning):
    """Emitted when a sample covariance had its spectrum floored."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def as_vector(x) -> np.ndarray:
    """Coerce AlphaVector / Portfolio / array-like to a 1-D float array."""
    entries = getattr(x, "entries", None)
    if entries is None:
        entries = getattr(x, "weights", x)
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ReturnsPanel:
    """T x n panel of per-period simple returns with asset identifiers."""

    assets: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise DimensionError(f"returns panel must be 2-D, got shape {rows.shape}")
        t, n = rows.shape
        if n < 2:
            raise DimensionError(f"need at least 2 assets, got {n}")
        if t < 2:
            raise DimensionError(f"need at least 2 periods, got {t}")
        if len(self.assets) != n:
            raise DimensionError(
                f"{len(self.assets)} asset names for {n} return columns"
            )
        if len(set(self.assets)) != n:
            raise NonFiniteData("asset identifiers must be unique")
        if not np.all(np.isfinite(rows)):
            raise NonFiniteData("returns panel contains non-finite entries")
        object.__setattr__(self, "assets", tuple(str(a) for a in self.assets))
        object.__setattr__(self, "rows", _frozen_array(rows))

    @property
    def n_periods(self) -> int:
        return self.rows.shape[0]

    @property
    def n_assets(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class AlphaVector:
    """Expected per-period returns (decimal fractions)."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 1:
            raise DimensionError(f"alpha must be 1-D, got shape {arr.shape}")
        if arr.size < 2:
            raise DimensionError(f"alpha needs at least 2 entries, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteData("alpha contains non-finite entries")
        object.__setattr__(self, "entries", _frozen_array(arr))

    @property
    def dim(self) -> int:
        return self.entries.size


def _sign_fix_columns(vectors: np.ndarray) -> np.ndarray:
    """Make each column's first significantly nonzero component positive."""
    fixed = vectors.copy()
    for j in range(fixed.shape[1]):
        col = fixed[:, j]
        thresh = 1e-8 * np.max(np.abs(col))
        idx = np.flatnonzero(np.abs(col) > thresh)
        pivot = idx[0] if idx.size else 0
        if col[pivot] < 0:
            fixed[:, j] = -col
    return fixed


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric positive-definite covariance with cached spectrum.

    ``eigenvalues`` are strictly descending; ``eigenvectors`` holds the
    matching orthonormal eigenvectors as columns, so that
    ``entries == eigenvectors @ diag(eigenvalues) @ eigenvectors.T``.
    """

    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_entries(cls, entries) -> "CovMatrix":
        mat = np.asarray(entries, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"covariance must be square, got shape {mat.shape}")
        if mat.shape[0] < 2:
            raise DimensionError("covariance needs dimension >= 2")
        if not np.all(np.isfinite(mat)):
            raise NonFiniteData("covariance contains non-finite entries")
        scale = np.max(np.abs(mat))
        if scale == 0.0:
            raise SingularCovariance("covariance is identically zero")
        if np.max(np.abs(mat - mat.T)) > SYMMETRY_RTOL * scale:
            raise AsymmetricCovariance(
                "covariance asymmetry exceeds relative tolerance "
                f"{SYMMETRY_RTOL:g}"
            )
        sym = 0.5 * (mat + mat.T)
        try:
            ascending, vectors = np.linalg.eigh(sym)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise ConvergenceFailure(f"eigendecomposition failed: {exc}") from exc
        order = np.argsort(ascending)[::-1]
        rho = ascending[order]
        vecs = _sign_fix_columns(vectors[:, order])
        if rho[-1] <= 0.0:
            raise SingularCovariance(
                f"smallest eigenvalue {rho[-1]:g} is not strictly positive"
            )
        recon = (vecs * rho) @ vecs.T
        err = np.linalg.norm(recon - sym) / np.linalg.norm(sym)
        if err > RECONSTRUCTION_RTOL:
            raise ConvergenceFailure(
                f"spectral reconstruction error {err:g} exceeds {RECONSTRUCTION_RTOL:g}"
            )
        return cls(
            entries=_frozen_array(sym),
            eigenvalues=_frozen_array(rho),
            eigenvectors=_frozen_array(vecs),
        )

    @classmethod
    def identity(cls, n: int) -> "CovMatrix":
        return cls.from_entries(np.eye(n))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def condition_number(self) -> float:
        return float(self.eigenvalues[0] / self.eigenvalues[-1])

    def solve(self, x) -> np.ndarray:
        """Sigma^-1 x through the cached spectrum (V diag(1/rho) V' x)."""
        return self.power_apply(x, -1.0)

    def power_apply(self, x, power: float) -> np.ndarray:
        """Apply Sigma^power to a vector via the cached spectrum."""
        vec = as_vector(x)
        if vec.size != self.dim:
            raise DimensionError(f"vector length {vec.size} != dimension {self.dim}")
        coeffs = self.eigenvectors.T @ vec
        return self.eigenvectors @ (self.eigenvalues**power * coeffs)

    def quad(self, x) -> float:
        """Quadratic form x' Sigma x."""
        vec = as_vector(x)
        return float(vec @ self.entries @ vec)


def estimate_moments(
    panel: ReturnsPanel, spd_repair: bool = True
) -> tuple[AlphaVector, CovMatrix]:
    """Sample mean and unbiased sample covariance, SPD-repaired if needed.

    With ``spd_repair`` enabled (the default) any eigenvalue of the sample
    covariance below ``EIGEN_FLOOR_RATIO * rho_1`` is clipped to that floor
    and the matrix reconstructed; a :class:`SpdRepairWarning` records the
    intervention. With repair disabled the same situation raises
    :class:`SingularCovariance`.
    """
    alpha = panel.rows.mean(axis=0)
    if np.ptp(alpha) <= DEGENERATE_ALPHA_TOL:
        raise DegenerateAlpha(
            "all column means equal within "
            f"{DEGENERATE_ALPHA_TOL:g}; frontier scalars would degenerate"
        )
    sample = np.cov(panel.rows, rowvar=False, ddof=1)
    sample = 0.5 * (sample + sample.T)
    rho, vecs = np.linalg.eigh(sample)
    if rho[-1] <= 0.0:
        raise SingularCovariance("sample covariance has no positive eigenvalue")
    floor = EIGEN_FLOOR_RATIO * rho[-1]
    if rho[0] <= floor:
        if not spd_repair:
            raise SingularCovariance(
                f"smallest eigenvalue {rho[0]:g} below floor {floor:g} "
                "and SPD repair is disabled"
            )
        warnings.warn(
            f"sample covariance eigenvalues clipped at {floor:g} "
            f"(smallest was {rho[0]:g})",
            SpdRepairWarning,
            stacklevel=2,
        )
        sample = (vecs * np.maximum(rho, floor)) @ vecs.T
        sample = 0.5 * (sample + sample.T)
    return AlphaVector(alpha), CovMatrix.from_entries(sample)


def condition_number(cov: CovMatrix) -> float:
    """Ratio of extreme eigenvalues, rho_max / rho_min >= 1."""
    return cov.condition_number


def spectral_decompose(cov: CovMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Descending eigenvalues and matching orthonormal eigenvector columns."""
    return cov.eigenvalues.copy(), cov.eigenvectors.copy()


def load_returns_csv(path) -> ReturnsPanel:
    """Read a returns panel from CSV.

    First row holds the asset names; every following row holds one period of
    simple returns as decimal fractions. A missing or blank cell is a hard
    error -- there is no imputation.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if len(rows) < 2:
        raise NonFiniteData(f"{path}: need a header row and at least one data row")
    header = [name.strip() for name in rows[0]]
    n = len(header)
    data = np.empty((len(rows) - 1, n), dtype=float)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise NonFiniteData(f"{path}: row {i} has {len(row)} cells, expected {n}")
        for j, cell in enumerate(row):
            text = cell.strip()
            if not text:
                raise NonFiniteData(f"{path}: missing cell at row {i}, column {j + 1}")
            try:
                data[i - 2, j] = float(text)
            except ValueError as exc:
                raise NonFiniteData(
                    f"{path}: cell at row {i}, column {j + 1} is not a number: {text!r}"
                ) from exc
    return ReturnsPanel(assets=tuple(header), rows=data)
