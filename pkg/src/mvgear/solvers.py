"""
Closed-form mean-variance portfolio programs.

All solutions are parameterized by the four frontier scalars

    A = 1'Sigma^-1 1,  B = alpha'Sigma^-1 1,  C = alpha'Sigma^-1 alpha,
    D = AC - B^2 > 0,

through two building blocks: the global minimum variance portfolio
theta_0 = Sigma^-1 1 / A and the fully-invested optimal risky portfolio
theta_alpha = Sigma^-1 alpha / B. Programs without a gearing constraint
(I-IV) and the geared return/Sharpe maximizations (V, VIII) are scalar
multiples of theta_alpha; the geared risk minimization (VI) and geared
mean-variance program (VII) mix theta_0 and theta_alpha:

    VI:  theta = (g0 - w) theta_0 + w theta_alpha,  w = (B/D)(alpha0 A - g0 B)
    VII: theta = (g0 - m) theta_0 + m theta_alpha,  m = B / gamma

The minimum-variance set at fixed gearing is the parabola

    sigma_p^2 = (alpha_p^2 A - 2 g0 alpha_p B + g0^2 C) / D,

minimized at alpha_p = g0 B / A with value g0^2 / A; sweeping (alpha_p, g0)
produces the Pareto surface.

Linear solves go through the spectral decomposition cached on CovMatrix
rather than explicit inversion.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateAlpha,
    DimensionError,
    InvalidPortfolio,
    NonFiniteData,
    NonPositiveParameter,
    ZeroB,
    ZeroSum,
)
from .moments import AlphaVector, CovMatrix, as_vector

# B within this absolute tolerance of zero leaves the fully-invested risky
# portfolio undefined.
ZERO_B_TOL = 1e-14
# D at or below this absolute tolerance means all assets share a mean.
DEGENERATE_D_TOL = 1e-14
# Relative tolerance for flagging surface points on the GMV / risky lines.
LINE_FLAG_RTOL = 1e-9


class InefficientBranchWarning(UserWarning):
    """Return target below the minimum-variance return at this gearing."""


class Program(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"
    VII = "VII"
    VIII = "VIII"
    GMV = "GMV"
    RISKY = "RISKY"
    QOQC = "QOQC"


@dataclass(frozen=True)
class FrontierScalars:
    """The four quadratic forms in Sigma^-1 behind every closed form."""

    A: float
    B: float
    C: float
    D: float


@dataclass(frozen=True)
class Portfolio:
    """Weight vector tagged with the program and parameters that produced it."""

    weights: np.ndarray
    program: Program
    params: dict
    gearing: float
    leverage: float
    alpha_p: float | None = None
    sigma_p: float | None = None
    assets: tuple[str, ...] | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise DimensionError(f"weights must be 1-D, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise NonFiniteData("weights contain non-finite entries")
        if abs(self.gearing - float(w.sum())) > 1e-12 * max(1.0, abs(self.gearing)):
            raise InvalidPortfolio("gearing field does not equal the weight sum")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.size


def _portfolio(
    weights: np.ndarray,
    program: Program,
    params: dict,
    alpha=None,
    cov: CovMatrix | None = None,
) -> Portfolio:
    w = np.asarray(weights, dtype=float)
    alpha_p = float(as_vector(alpha) @ w) if alpha is not None else None
    sigma_p = float(np.sqrt(max(cov.quad(w), 0.0))) if cov is not None else None
    return Portfolio(
        weights=w,
        program=program,
        params=dict(params),
        gearing=float(w.sum()),
        leverage=float(np.abs(w).sum()),
        alpha_p=alpha_p,
        sigma_p=sigma_p,
    )


def leverage(portfolio: Portfolio) -> tuple[float, float]:
    """(gearing, leverage) = (1'theta, 1'|theta|)."""
    w = portfolio.weights
    return float(w.sum()), float(np.abs(w).sum())


def frontier_scalars(alpha, cov: CovMatrix) -> FrontierScalars:
    a = as_vector(alpha)
    if a.size != cov.dim:
        raise DimensionError(f"alpha length {a.size} != covariance dim {cov.dim}")
    ones = np.ones(cov.dim)
    si_ones = cov.solve(ones)
    si_alpha = cov.solve(a)
    big_a = float(ones @ si_ones)
    big_b = float(a @ si_ones)
    big_c = float(a @ si_alpha)
    big_d = big_a * big_c - big_b**2
    if big_d <= DEGENERATE_D_TOL:
        raise DegenerateAlpha(
            f"D = AC - B^2 = {big_d:g} is not positive; "
            "all assets share the same expected return"
        )
    return FrontierScalars(A=big_a, B=big_b, C=big_c, D=big_d)


def gmv_portfolio(cov: CovMatrix) -> Portfolio:
    """Global minimum variance portfolio Sigma^-1 1 / (1'Sigma^-1 1)."""
    raw = cov.solve(np.ones(cov.dim))
    w = raw / raw.sum()
    return _portfolio(w, Program.GMV, {}, cov=cov)


def optimal_risky_portfolio(alpha, cov: CovMatrix) -> Portfolio:
    """Fully-invested Sharpe-maximizing portfolio Sigma^-1 alpha / B."""
    a = as_vector(alpha)
    raw = cov.solve(a)
    b = float(raw.sum())
    if abs(b) <= ZERO_B_TOL:
        raise ZeroB(f"1'Sigma^-1 alpha = {b:g}; risky portfolio undefined")
    w = raw / b
    return _portfolio(w, Program.RISKY, {}, alpha=a, cov=cov)


def _require_positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise NonPositiveParameter(f"{name} must be positive, got {value}")
    return value


def solve_I(alpha, cov: CovMatrix, sigma0: float) -> Portfolio:
    """Maximum return at risk bound sigma0: theta = (sigma0/sqrt(C)) Sigma^-1 alpha."""
    sigma0 = _require_positive("sigma0", sigma0)
    a = as_vector(alpha)
    scal = frontier_scalars(a, cov)
    w = (sigma0 / np.sqrt(scal.C)) * cov.solve(a)
    return _portfolio(w, Program.I, {"sigma0": sigma0}, alpha=a, cov=cov)


def solve_II(alpha, cov: CovMatrix, alpha0: float) -> Portfolio:
    """Minimum variance at return target alpha0: theta = (alpha0/C) Sigma^-1 alpha."""
    alpha0 = _require_positive("alpha0", alpha0)
    a = as_vector(alpha)
    scal = frontier_scalars(a, cov)
    w = (alpha0 / scal.C) * cov.solve(a)
    return _portfolio(w, Program.II, {"alpha0": alpha0}, alpha=a, cov=cov)


def solve_III(alpha, cov: CovMatrix, gamma: float) -> Portfolio:
    """Unconstrained mean-variance trade-off: theta = Sigma^-1 alpha / gamma."""
    gamma = _require_positive("gamma", gamma)
    a = as_vector(alpha)
    w = cov.solve(a) / gamma
    return _portfolio(w, Program.III, {"gamma": gamma}, alpha=a, cov=cov)


def solve_IV(alpha, cov: CovMatrix, g0: float = 1.0) -> Portfolio:
    """Sharpe maximization scaled to gearing g0 (g0 theta_alpha)."""
    g0 = float(g0)
    if g0 == 0.0:
        raise NonPositiveParameter("g0 must be nonzero for the Sharpe program")
    a = as_vector(alpha)
    w = g0 * optimal_risky_portfolio(a, cov).weights
    return _portfolio(w, Program.IV, {"g0": g0}, alpha=a, cov=cov)


def solve_V(
    alpha, cov: CovMatrix, sigma0: float | None = None, g0: float | None = None
) -> Portfolio:
    """Geared return maximization: theta = g0 theta_alpha.

    Exactly one of ``sigma0`` and ``g0`` must be supplied; fixing the risk
    fixes the gearing through g0 = sigma0 B / sqrt(C), and vice versa.
    """
    if (sigma0 is None) == (g0 is None):
        raise NonPositiveParameter("supply exactly one of sigma0 and g0")
    a = as_vector(alpha)
    scal = frontier_scalars(a, cov)
    if abs(scal.B) <= ZERO_B_TOL:
        raise ZeroB(f"B = {scal.B:g}; geared risky portfolio undefined")
    if sigma0 is not None:
        sigma0 = _require_positive("sigma0", sigma0)
        g0 = sigma0 * scal.B / np.sqrt(scal.C)
        params = {"sigma0": sigma0, "g0": float(g0)}
    else:
        g0 = _require_positive("g0", g0)
        params = {"g0": float(g0)}
    w = (g0 / scal.B) * cov.solve(a)
    return _portfolio(w, Program.V, params, alpha=a, cov=cov)


def solve_VI(alpha, cov: CovMatrix, alpha0: float, g0: float) -> Portfolio:
    """Geared minimum variance at return target alpha0.

    Solves min (1/2)theta'Sigma theta s.t. alpha'theta = alpha0, 1'theta = g0
    through the multiplier expansion

        theta = ((alpha0 A - g0 B)/D) Sigma^-1 alpha
              + ((g0 C - alpha0 B)/D) Sigma^-1 1.

    The return constraint is treated as binding; when alpha0 falls below the
    minimum-variance return g0 B / A, the solution sits on the inefficient
    branch and an :class:`InefficientBranchWarning` is emitted.
    """
    alpha0 = float(alpha0)
    g0 = float(g0)
    a = as_vector(alpha)
    scal = frontier_scalars(a, cov)
    lam1 = (alpha0 * scal.A - g0 * scal.B) / scal.D
    lam2 = (g0 * scal.C - alpha0 * scal.B) / scal.D
    w = lam1 * cov.solve(a) + lam2 * cov.solve(np.ones(cov.dim))
    inflection = g0 * scal.B / scal.A
    if alpha0 < inflection - 1e-12 * max(1.0, abs(inflection)):
        warnings.warn(
            f"return target {alpha0:g} below the minimum-variance return "
            f"{inflection:g} at gearing {g0:g}; solution is on the "
            "inefficient branch",
            InefficientBranchWarning,
            stacklevel=2,
        )
    return _portfolio(
        w, Program.VI, {"alpha0": alpha0, "g0": g0}, alpha=a, cov=cov
    )


def solve_VII(alpha, cov: CovMatrix, gamma: float, g0: float) -> Portfolio:
    """Geared mean-variance program.

    Solves max alpha'theta - (gamma/2) theta'Sigma theta s.t. 1'theta = g0:

        theta = (g0 - B/gamma) Sigma^-1 1 / A + Sigma^-1 alpha / gamma.
    """
    gamma = _require_positive("gamma", gamma)
    g0 = float(g0)
    a = as_vector(alpha)
    ones = np.ones(cov.dim)
    si_ones = cov.solve(ones)
    si_alpha = cov.solve(a)
    big_a = float(ones @ si_ones)
    big_b = float(a @ si_ones)
    w = (g0 - big_b / gamma) * si_ones / big_a + si_alpha / gamma
    return _portfolio(w, Program.VII, {"gamma": gamma, "g0": g0}, alpha=a, cov=cov)


def solve_VIII(alpha, cov: CovMatrix, g0: float) -> Portfolio:
    """Geared Sharpe maximization: theta = g0 Sigma^-1 alpha / (1'Sigma^-1 alpha)."""
    g0 = float(g0)
    if g0 == 0.0:
        raise NonPositiveParameter("g0 must be nonzero for the Sharpe program")
    a = as_vector(alpha)
    w = g0 * optimal_risky_portfolio(a, cov).weights
    return _portfolio(w, Program.VIII, {"g0": g0}, alpha=a, cov=cov)


def frontier_variance(scalars: FrontierScalars, alpha_p: float, g0: float) -> float:
    """Minimum portfolio variance at return alpha_p and gearing g0."""
    if scalars.D <= DEGENERATE_D_TOL:
        raise DegenerateAlpha(f"D = {scalars.D:g} is not positive")
    return (
        alpha_p**2 * scalars.A - 2.0 * g0 * alpha_p * scalars.B + g0**2 * scalars.C
    ) / scalars.D


@dataclass(frozen=True)
class FrontierPoint:
    """One (alpha_p, g0, sigma_p) point of the Pareto surface."""

    alpha_p: float
    g0: float
    sigma_p: float
    is_gmv_line: bool = False
    is_risky_line: bool = False
    weights: Portfolio | None = None


def pareto_surface(
    alpha,
    cov: CovMatrix,
    alpha_p_grid,
    g0_grid,
    attach_weights: bool = False,
) -> list[FrontierPoint]:
    """Evaluate the minimum-variance surface over an (alpha_p, g0) grid.

    Points on the GMV line (alpha_p = g0 B / A) and the geared-risky line
    (alpha_p = g0 C / B) are flagged. Output is grid-row-major: the alpha_p
    grid varies in the outer loop.
    """
    a = as_vector(alpha)
    alphas = np.atleast_1d(np.asarray(alpha_p_grid, dtype=float))
    gearings = np.atleast_1d(np.asarray(g0_grid, dtype=float))
    if alphas.size == 0 or gearings.size == 0:
        raise DimensionError("grids must be non-empty")
    if not (np.all(np.isfinite(alphas)) and np.all(np.isfinite(gearings))):
        raise NonFiniteData("grids must be finite")
    scal = frontier_scalars(a, cov)
    points: list[FrontierPoint] = []
    for alpha_p in alphas:
        for g0 in gearings:
            var = frontier_variance(scal, float(alpha_p), float(g0))
            gmv_return = g0 * scal.B / scal.A
            on_gmv = abs(alpha_p - gmv_return) <= LINE_FLAG_RTOL * max(
                1.0, abs(gmv_return)
            )
            if abs(scal.B) > ZERO_B_TOL:
                risky_return = g0 * scal.C / scal.B
                on_risky = abs(alpha_p - risky_return) <= LINE_FLAG_RTOL * max(
                    1.0, abs(risky_return)
                )
            else:
                on_risky = False
            port = None
            if attach_weights:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", InefficientBranchWarning)
                    port = solve_VI(a, cov, alpha0=float(alpha_p), g0=float(g0))
            points.append(
                FrontierPoint(
                    alpha_p=float(alpha_p),
                    g0=float(g0),
                    sigma_p=float(np.sqrt(max(var, 0.0))),
                    is_gmv_line=bool(on_gmv),
                    is_risky_line=bool(on_risky),
                    weights=port,
                )
            )
    return points


def implied_returns(target: Portfolio, cov: CovMatrix) -> AlphaVector:
    """Reverse-optimize the return views implied by a fully-invested portfolio.

    Any positive multiple of Sigma theta reproduces theta when pushed back
    through theta = Sigma^-1 pi / (pi'Sigma^-1 1); the result is normalized
    to sum to one.
    """
    w = as_vector(target)
    if abs(w.sum() - 1.0) > 1e-10:
        raise InvalidPortfolio(
            f"target portfolio gearing {w.sum():g} != 1; reverse optimization "
            "assumes a fully-invested target"
        )
    raw = cov.entries @ w
    total = float(raw.sum())
    if abs(total) <= 1e-14 * max(1.0, float(np.abs(raw).max(initial=0.0))):
        raise ZeroSum("Sigma theta sums to ~0; normalization undefined")
    return AlphaVector(raw / total)
