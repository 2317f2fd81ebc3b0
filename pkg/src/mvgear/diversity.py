"""
Mean-variance optimization under a quadratic diversity constraint.

The problem is

    max  alpha'theta - (gamma/2) theta'Sigma theta
    s.t. 1'theta = g0   and   theta'theta = 1/n0,

where n0 is the required effective number of bets. Feasibility needs
g0^2/n <= 1/n0 (the gearing hyperplane's closest point to the origin is
g0 e with |g0 e|^2 = g0^2/n); at equality the feasible set is the single
point g0 e.

Eliminating the hyperplane with an orthonormal basis Z of the complement
of 1 (theta = g0 e + Z u) turns the problem into a trust-region subproblem
on the sphere |u| = Delta, Delta^2 = 1/n0 - g0^2/n:

    min  (1/2) u'H u - b'u,   H = gamma Z'Sigma Z,
                              b = Z'(alpha - gamma g0 Sigma e).

The stationarity system (H + nu I) u = b admits a unique root of
|u(nu)| = Delta on the branch nu > -lambda_min(H) (|u(nu)| is strictly
decreasing there), and by trust-region optimality that root is the global
maximizer; the classical hard case (b orthogonal to the bottom eigenspace)
is handled by adding a bottom-eigenvector component. The root is located
by safeguarded bisection/secant (Brent).

Multiplier convention: the reported lambda1 comes from differentiating the
Lagrangian literally, so stationarity reads

    -alpha + gamma Sigma theta - 2 lambda1 theta - lambda2 1 = 0,

which maps to the ridge form (nu I + gamma Sigma) theta = alpha + lambda2 1
via nu = -2 lambda1; nu is surfaced in the diagnostics as ``ridge_shift``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq

from .errors import (
    DimensionError,
    Infeasible,
    NonPositiveParameter,
    NoRoot,
    ToleranceNotMet,
)
from .moments import CovMatrix, as_vector
from .solvers import Program, _portfolio

# Stated solution tolerances.
SPHERE_TOL = 1e-8
GEARING_TOL = 1e-10
STATIONARITY_TOL = 1e-8
# Outer root: bracket width target and iteration cap.
ROOT_XTOL = 1e-12
ROOT_MAXITER = 200
# Bracket growth cap before declaring no sign change.
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class QoqcProblem:
    """Diversity-constrained mean-variance problem instance."""

    alpha: np.ndarray
    cov: CovMatrix
    gamma: float
    g0: float
    n0: float

    def __post_init__(self):
        a = as_vector(self.alpha)
        if a.size != self.cov.dim:
            raise DimensionError(
                f"alpha length {a.size} != covariance dim {self.cov.dim}"
            )
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "g0", float(self.g0))
        object.__setattr__(self, "n0", float(self.n0))
        if not np.isfinite(self.gamma) or self.gamma <= 0.0:
            raise NonPositiveParameter(f"gamma must be positive, got {self.gamma}")
        n = self.cov.dim
        if not 1.0 <= self.n0 <= n:
            raise Infeasible(f"n0 = {self.n0} outside [1, n = {n}]")
        if self.g0**2 / n > 1.0 / self.n0 + 1e-12:
            raise Infeasible(
                f"g0^2/n = {self.g0**2 / n:g} exceeds 1/n0 = {1.0 / self.n0:g}; "
                "no vector with that gearing fits the diversity sphere"
            )

    @property
    def dim(self) -> int:
        return self.cov.dim

    def objective(self, theta: np.ndarray) -> float:
        return float(self.alpha @ theta - 0.5 * self.gamma * self.cov.quad(theta))


@dataclass(frozen=True)
class QoqcSolution:
    """Solution with multipliers, objective, and KKT residual."""

    weights: np.ndarray
    lambda1: float
    lambda2: float
    objective: float
    kkt_residual: float
    diagnostics: dict = field(default_factory=dict)


def _stationarity_residual(problem: QoqcProblem, theta, lam1, lam2) -> float:
    grad = (
        -problem.alpha
        + problem.gamma * (problem.cov.entries @ theta)
        - 2.0 * lam1 * theta
        - lam2 * np.ones(problem.dim)
    )
    return float(np.abs(grad).max())


def _multipliers(problem: QoqcProblem, theta: np.ndarray, nu: float):
    n = problem.dim
    lam2 = float(
        np.ones(n)
        @ (-problem.alpha + problem.gamma * (problem.cov.entries @ theta) + nu * theta)
        / n
    )
    lam1 = -nu / 2.0
    return lam1, lam2


def _boundary_solution(problem: QoqcProblem) -> QoqcSolution:
    # Unique feasible point; constraint gradients are parallel there, so the
    # multipliers are least-squares certificates only.
    n = problem.dim
    theta = problem.g0 * np.ones(n) / n
    rhs = problem.gamma * (problem.cov.entries @ theta) - problem.alpha
    basis = np.column_stack([2.0 * theta, np.ones(n)])
    sol, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
    lam1, lam2 = float(sol[0]), float(sol[1])
    return QoqcSolution(
        weights=theta,
        lambda1=lam1,
        lambda2=lam2,
        objective=problem.objective(theta),
        kkt_residual=_stationarity_residual(problem, theta, lam1, lam2),
        diagnostics={"boundary": True, "hard_case": False},
    )


def solve_qoqc(problem: QoqcProblem) -> QoqcSolution:
    """Solve the diversity-constrained program to its stated tolerances."""
    n = problem.dim
    delta2 = 1.0 / problem.n0 - problem.g0**2 / n
    if delta2 <= 1e-14:
        return _boundary_solution(problem)
    delta = float(np.sqrt(delta2))

    e = np.ones(n) / n
    basis = null_space(np.ones((1, n)))
    reduced_h = problem.gamma * (basis.T @ problem.cov.entries @ basis)
    reduced_h = 0.5 * (reduced_h + reduced_h.T)
    b = basis.T @ (problem.alpha - problem.gamma * problem.g0 * (problem.cov.entries @ e))
    d, u_vecs = np.linalg.eigh(reduced_h)
    bt = u_vecs.T @ b

    def u_norm2(nu: float) -> float:
        return float(np.sum((bt / (d + nu)) ** 2))

    def h(nu: float) -> float:
        return u_norm2(nu) - delta2

    scale = max(1.0, float(np.abs(d).max()))
    lo = -d[0] + 1e-13 * scale
    diagnostics: dict = {"boundary": False}

    if h(lo) <= 0.0:
        # Hard case: no pole at -lambda_min; fill the radius along the bottom
        # eigenvector (objective is invariant to its sign; + is fixed).
        nu = -float(d[0])
        gap = d - d[0] > 1e-12 * scale
        u_reg = np.zeros_like(bt)
        u_reg[gap] = bt[gap] / (d[gap] + nu)
        tau = float(np.sqrt(max(delta2 - float(u_reg @ u_reg), 0.0)))
        u_red = u_reg.copy()
        u_red[0] += tau
        u = u_vecs @ u_red
        diagnostics["hard_case"] = True
    else:
        hi = max(lo + scale, float(np.linalg.norm(b)) / delta - d[0])
        doublings = 0
        while h(hi) > 0.0:
            doublings += 1
            if doublings > MAX_DOUBLINGS:
                raise NoRoot(
                    "diversity constraint equation showed no sign change after "
                    f"{MAX_DOUBLINGS} doublings (h({hi:g}) = {h(hi):g})"
                )
            hi = 2.0 * hi + scale
        try:
            nu = float(brentq(h, lo, hi, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER))
        except RuntimeError as exc:
            raise ToleranceNotMet(f"outer root search failed to converge: {exc}") from exc
        u = u_vecs @ (bt / (d + nu))
        diagnostics["hard_case"] = False
        diagnostics["bracket"] = (float(lo), float(hi))

    # Polish onto the sphere exactly (direction is unchanged, u is 1-orthogonal).
    norm_u = float(np.linalg.norm(u))
    if norm_u > 0.0:
        u *= delta / norm_u
    theta = problem.g0 * e + basis @ u

    lam1, lam2 = _multipliers(problem, theta, nu)
    residual = _stationarity_residual(problem, theta, lam1, lam2)
    sphere_err = abs(float(theta @ theta) - 1.0 / problem.n0)
    gearing_err = abs(float(theta.sum()) - problem.g0)
    if sphere_err > SPHERE_TOL or gearing_err > GEARING_TOL:
        raise ToleranceNotMet(
            f"constraint residuals too large: |theta'theta - 1/n0| = {sphere_err:g}, "
            f"|1'theta - g0| = {gearing_err:g}"
        )
    if residual > STATIONARITY_TOL:
        raise ToleranceNotMet(f"stationarity residual {residual:g} > {STATIONARITY_TOL:g}")
    diagnostics["ridge_shift"] = float(nu)
    return QoqcSolution(
        weights=theta,
        lambda1=lam1,
        lambda2=lam2,
        objective=problem.objective(theta),
        kkt_residual=residual,
        diagnostics=diagnostics,
    )


def qoqc_portfolio(problem: QoqcProblem, solution: QoqcSolution):
    """Wrap a solution in the shared Portfolio record."""
    return _portfolio(
        solution.weights,
        Program.QOQC,
        {
            "gamma": problem.gamma,
            "g0": problem.g0,
            "n0": problem.n0,
            "lambda1": solution.lambda1,
            "lambda2": solution.lambda2,
        },
        alpha=problem.alpha,
        cov=problem.cov,
    )
